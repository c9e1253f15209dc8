"""Symbolic Fourier Approximation.

A window is optionally z-normalized, reduced to its lowest Fourier
coefficients (real and imaginary parts interleaved, ``l`` values in total)
and each value is mapped to a letter using bin edges learned per
(dimension, window length, position).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from numba import njit

from .ingest import ZERO_STD, z_normalize

EQUI_DEPTH = "equi_depth"
EQUI_FREQUENCY = "equi_frequency"
BINNING_MODES = (EQUI_DEPTH, EQUI_FREQUENCY)

DEFAULT_ALPHABET = 4
MAX_BIN_SAMPLES = 200_000


def _check_word_length(l: int) -> None:
    if l < 2 or l % 2:
        raise ValueError(f"word length must be an even positive integer, got {l}")


def effective_word_length(l: int, window_len: int) -> int:
    """Word length used for windows shorter than ``l`` (largest even ``<= w``)."""
    return min(l, window_len - window_len % 2)


def truncated_fourier(window, l: int, include_dc: bool = False) -> np.ndarray:
    """First ``l/2`` DFT coefficients of ``window``, interleaved ``[re, im, ...]``.

    Coefficients start at frequency 1 unless ``include_dc``.  The window is
    used as given; callers normalize first.
    """
    _check_word_length(l)
    x = np.asarray(window, dtype=np.float64)
    if l > x.shape[0]:
        raise ValueError(f"word length {l} exceeds window length {x.shape[0]}")
    k0 = 0 if include_dc else 1
    coefs = np.fft.rfft(x)[k0:k0 + l // 2]
    out = np.empty(l)
    out[0::2] = coefs.real
    out[1::2] = coefs.imag
    return out


@njit(cache=True)
def _sliding_dft(x, w, k0, n_coef, out, row0, normalize):
    """Momentary DFT over all offsets of ``x``; rows ``row0..`` of ``out``.

    The running sums are rebuilt directly every ``w`` steps to bound drift.
    Writes coefficients of the z-normalized window when ``normalize``, else of
    the raw window.  Returns the number of rows written.
    """
    n = x.shape[0]
    n_win = n - w + 1
    if n_win <= 0:
        return 0
    center = 0.0
    for j in range(n):
        center += x[j]
    center /= n
    rot_c = np.empty(n_coef)
    rot_s = np.empty(n_coef)
    for k in range(n_coef):
        ang = 2.0 * np.pi * (k0 + k) / w
        rot_c[k] = np.cos(ang)
        rot_s[k] = np.sin(ang)
    re = np.zeros(n_coef)
    im = np.zeros(n_coef)
    s1 = 0.0
    s2 = 0.0
    for a in range(n_win):
        if a % w == 0:
            s1 = 0.0
            s2 = 0.0
            for k in range(n_coef):
                re[k] = 0.0
                im[k] = 0.0
            for j in range(w):
                v = x[a + j] - center
                s1 += v
                s2 += v * v
                for k in range(n_coef):
                    ang = 2.0 * np.pi * (k0 + k) * j / w
                    re[k] += v * np.cos(ang)
                    im[k] -= v * np.sin(ang)
        else:
            v_out = x[a - 1] - center
            v_in = x[a + w - 1] - center
            s1 += v_in - v_out
            s2 += v_in * v_in - v_out * v_out
            for k in range(n_coef):
                r = re[k] - v_out + v_in
                i = im[k]
                re[k] = r * rot_c[k] - i * rot_s[k]
                im[k] = r * rot_s[k] + i * rot_c[k]
        mean = s1 / w
        var = s2 / w - mean * mean
        if var <= 1e-6 * (s2 / w):
            # cancellation-prone: exact two-pass variance
            m2 = 0.0
            for j in range(w):
                m2 += x[a + j]
            m2 /= w
            var = 0.0
            for j in range(w):
                d = x[a + j] - m2
                var += d * d
            var /= w
        sd = np.sqrt(var) if var > 0.0 else 0.0
        row = row0 + a
        if not normalize:
            for k in range(n_coef):
                out[row, 2 * k] = re[k] + (w * center if k0 + k == 0 else 0.0)
                out[row, 2 * k + 1] = im[k]
        elif sd < 1e-8:
            for k in range(2 * n_coef):
                out[row, k] = 0.0
        else:
            for k in range(n_coef):
                if k0 + k == 0:
                    out[row, 2 * k] = 0.0
                    out[row, 2 * k + 1] = 0.0
                else:
                    out[row, 2 * k] = re[k] / sd
                    out[row, 2 * k + 1] = im[k] / sd
        for k in range(n_coef):
            # DC and Nyquist terms of a real window are real; drop update residue
            if k0 + k == 0 or 2 * (k0 + k) == w:
                out[row, 2 * k + 1] = 0.0
    return n_win


@njit(cache=True)
def _sliding_dft_batch(flat, starts, lengths, w, k0, n_coef, out, sample_of_row, offset_of_row,
                       normalize):
    row = 0
    for s in range(starts.shape[0]):
        n = lengths[s]
        if n < w:
            continue
        written = _sliding_dft(flat[starts[s]:starts[s] + n], w, k0, n_coef, out, row, normalize)
        for a in range(written):
            sample_of_row[row + a] = s
            offset_of_row[row + a] = a
        row += written
    return row


def sliding_fourier(series, window_len: int, l: int, include_dc: bool = False,
                    normalize: bool = True) -> np.ndarray:
    """SFA coefficients of every window of ``series``.

    Returns an array of shape ``(n - w + 1, l)``; row ``a`` matches
    ``truncated_fourier(z_normalize(series[a:a + w]), l)`` (without the
    ``z_normalize`` when ``normalize`` is false).  Runs in
    ``O(n * l)`` using an incremental DFT update between offsets.
    """
    _check_word_length(l)
    x = np.ascontiguousarray(series, dtype=np.float64)
    if l > window_len:
        raise ValueError(f"word length {l} exceeds window length {window_len}")
    n_win = max(0, x.shape[0] - window_len + 1)
    out = np.empty((n_win, l))
    if n_win:
        _sliding_dft(x, window_len, 0 if include_dc else 1, l // 2, out, 0, normalize)
    return out


@dataclass
class WindowTable:
    """Coefficients of all windows of one length over many series.

    Rows are ordered by series, then offset.
    """

    coefs: np.ndarray
    sample: np.ndarray
    offset: np.ndarray


def sliding_fourier_batch(series_list, window_len: int, l: int,
                          include_dc: bool = False, normalize: bool = True) -> WindowTable:
    """Vectorized :func:`sliding_fourier` over a list of 1-D series."""
    _check_word_length(l)
    lengths = np.array([len(s) for s in series_list], dtype=np.int64)
    starts = np.zeros_like(lengths)
    if len(lengths) > 1:
        starts[1:] = np.cumsum(lengths)[:-1]
    flat = (np.concatenate([np.asarray(s, dtype=np.float64) for s in series_list])
            if len(series_list) else np.empty(0))
    n_rows = int(np.maximum(lengths - window_len + 1, 0).sum())
    coefs = np.empty((n_rows, l))
    sample = np.empty(n_rows, dtype=np.int64)
    offset = np.empty(n_rows, dtype=np.int64)
    if n_rows:
        _sliding_dft_batch(flat, starts, lengths, window_len, 0 if include_dc else 1,
                           l // 2, coefs, sample, offset, normalize)
    return WindowTable(coefs, sample, offset)


def fit_bins(values, alphabet_size: int = DEFAULT_ALPHABET, mode: str = EQUI_DEPTH) -> np.ndarray:
    """Learn quantization edges for each column of ``values``.

    Parameters
    ----------
    values : array, shape (n_values, l) or (n_values,)
        Training coefficients; one column per word position.
    alphabet_size : int
        Number of letters ``c``; ``c - 1`` edges are returned per position.
    mode : {"equi_depth", "equi_frequency"}
        ``equi_depth`` splits ``[min, max]`` into ``c`` equal-width intervals.
        ``equi_frequency`` places edges between order statistics so that each
        bin holds the same number of values (midpoint when the split falls
        between two values).

    Returns
    -------
    edges : array, shape (l, c - 1)
    """
    if alphabet_size < 2:
        raise ValueError("alphabet size must be >= 2")
    if mode not in BINNING_MODES:
        raise ValueError(f"unknown binning mode {mode!r}")
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] == 0:
        raise ValueError("cannot fit bins on an empty collection")
    c = alphabet_size
    if mode == EQUI_DEPTH:
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        steps = np.arange(1, c) / c
        edges = lo[:, None] + (hi - lo)[:, None] * steps[None, :]
        # all-equal collections give exact edges
        return np.where((hi == lo)[:, None], lo[:, None], edges)
    srt = np.sort(v, axis=0)
    size = srt.shape[0]
    edges = np.empty((v.shape[1], c - 1))
    for k in range(1, c):
        q = k * size / c
        qi = int(q)
        if q == qi and 0 < qi < size:
            edges[:, k - 1] = 0.5 * (srt[qi - 1] + srt[qi])
        else:
            edges[:, k - 1] = srt[min(qi, size - 1)]
    return edges


def quantize(coefs, edges) -> np.ndarray:
    """Letter indices for coefficient rows.

    The letter at a position is the number of edges ``<= value``: the index
    of the first edge strictly greater than the value.
    """
    x = np.asarray(coefs, dtype=np.float64)
    e = np.asarray(edges, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    l = e.shape[0]
    letters = np.empty((x.shape[0], l), dtype=np.int64)
    for p in range(l):
        letters[:, p] = np.searchsorted(e[p], x[:, p], side="right")
    return letters[0] if single else letters


def letters_to_text(letters) -> str:
    return "".join(chr(ord("a") + int(i)) for i in letters)


def word_codes(letters, alphabet_size: int) -> np.ndarray:
    """Pack letter rows into integers (most significant letter first)."""
    letters = np.asarray(letters, dtype=np.int64)
    code = np.zeros(letters.shape[0], dtype=np.int64)
    for p in range(letters.shape[1]):
        code = code * alphabet_size + letters[:, p]
    return code


def subsample_rows(n_rows: int, cap: int, seed: int):
    if cap is None or n_rows <= cap:
        return None
    return np.sort(np.random.default_rng(seed).choice(n_rows, size=cap, replace=False))


@dataclass
class SfaModel:
    """Fitted quantization for every (dimension, window length) pair.

    ``edges[(dim, w)]`` has shape ``(l_w, alphabet_size - 1)`` where
    ``l_w = effective_word_length(word_length, w)``.
    """

    word_length: int
    alphabet_size: int = DEFAULT_ALPHABET
    binning: str = EQUI_DEPTH
    include_dc: bool = False
    normalize_windows: bool = True
    edges: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        _check_word_length(self.word_length)
        if self.binning not in BINNING_MODES:
            raise ValueError(f"unknown binning mode {self.binning!r}")

    def length_for(self, window_len: int) -> int:
        return effective_word_length(self.word_length, window_len)

    def fit_pair(self, dim: int, window_len: int, coefs, max_samples=MAX_BIN_SAMPLES, seed=0):
        """Learn the edges of one (dim, window length) pair from its training windows."""
        lw = self.length_for(window_len)
        coefs = np.asarray(coefs)[:, :lw]
        idx = subsample_rows(coefs.shape[0], max_samples, seed)
        if idx is not None:
            coefs = coefs[idx]
        self.edges[(dim, window_len)] = fit_bins(coefs, self.alphabet_size, self.binning)
        return self

    def has(self, dim: int, window_len: int) -> bool:
        return (dim, window_len) in self.edges

    def window_word(self, dim: int, window) -> str:
        """Word of a single raw window, computed directly (no sliding update)."""
        w = len(window)
        lw = self.length_for(w)
        window = np.asarray(window, dtype=np.float64)
        if self.normalize_windows:
            window = z_normalize(window)
        coefs = truncated_fourier(window, lw, self.include_dc)
        return letters_to_text(quantize(coefs, self.edges[(dim, w)]))

    def series_letters(self, dim: int, window_len: int, series) -> np.ndarray:
        """Letter rows for every window of ``series`` (sliding path)."""
        lw = self.length_for(window_len)
        coefs = sliding_fourier(series, window_len, lw, self.include_dc, self.normalize_windows)
        return quantize(coefs, self.edges[(dim, window_len)]) if len(coefs) else \
            np.empty((0, lw), dtype=np.int64)


def fit_sfa(series_by_dim, window_lengths, word_length: int, alphabet_size: int = DEFAULT_ALPHABET,
            binning: str = EQUI_DEPTH, include_dc: bool = False, normalize_windows: bool = True,
            max_samples=MAX_BIN_SAMPLES, seed: int = 0) -> SfaModel:
    """Fit an :class:`SfaModel` on raw training streams.

    ``series_by_dim[d]`` lists the dimension-``d`` stream of each training
    sample.  Each dimension is trained independently.
    """
    model = SfaModel(word_length, alphabet_size, binning, include_dc, normalize_windows)
    for d, streams in enumerate(series_by_dim):
        for w in window_lengths:
            lw = model.length_for(w)
            table = sliding_fourier_batch(streams, w, lw, include_dc, normalize_windows)
            if table.coefs.shape[0]:
                model.fit_pair(d, w, table.coefs, max_samples, seed)
    return model
