"""Bag-of-patterns extraction over all streams, window lengths and bigrams.

Two paths produce identical bags:

* :func:`build_bag` works on one sample and returns :class:`WordKey` counts;
* :class:`WindowCache` + :func:`extract_keys` process a whole dataset at once
  and return integer-packed keys, which is what training and prediction use.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import BagOfPatterns, Dataset, MultivariateSeries, WordKey
from .ingest import derivative
from .sfa import (
    DEFAULT_ALPHABET,
    EQUI_DEPTH,
    MAX_BIN_SAMPLES,
    SfaModel,
    effective_word_length,
    letters_to_text,
    quantize,
    sliding_fourier_batch,
    word_codes,
)

MIN_WINDOW = 4


@dataclass(frozen=True)
class ExtractionConfig:
    """Feature-space switches.

    ``window_lengths=None`` means every length from 4 to the longest training
    sample, thinned by ``window_step``.  By default windows keep their level
    and scale (``normalize_windows=False``) and the DC term is part of the
    word; per-window z-normalization discards exactly the offsets that
    separate classes on many sensor datasets.
    """

    window_lengths: Optional[tuple] = None
    word_length: int = 4
    alphabet_size: int = DEFAULT_ALPHABET
    binning: str = EQUI_DEPTH
    use_bigrams: bool = True
    use_derivatives: bool = True
    multivariate_ids: bool = True
    include_dc: bool = True
    normalize_windows: bool = False
    window_step: int = 1
    max_bin_samples: Optional[int] = MAX_BIN_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.window_lengths is not None:
            wl = tuple(sorted({int(w) for w in self.window_lengths}))
            if not wl:
                raise ValueError("window_lengths must not be empty")
            if wl[0] < MIN_WINDOW:
                raise ValueError(f"window lengths must be >= {MIN_WINDOW}, got {wl[0]}")
            object.__setattr__(self, "window_lengths", wl)
        if self.window_step < 1:
            raise ValueError("window_step must be >= 1")

    def with_(self, **changes) -> "ExtractionConfig":
        return replace(self, **changes)


def default_window_lengths(ds, step: int = 1) -> tuple:
    """All window lengths ``4..max sample length`` (every ``step``-th one)."""
    lengths = ds.lengths if isinstance(ds, Dataset) else np.array([np.shape(a)[-1] for a in ds])
    if len(lengths) == 0:
        raise ValueError("cannot derive window lengths from an empty dataset")
    n_max = int(np.max(lengths))
    if n_max < MIN_WINDOW:
        raise ValueError(f"series too short: longest sample has {n_max} < {MIN_WINDOW} values")
    return tuple(range(MIN_WINDOW, n_max + 1, step))


def prepare_streams(values: np.ndarray, use_derivatives: bool) -> np.ndarray:
    """Raw streams, followed by their derivatives when enabled."""
    values = np.asarray(values, dtype=np.float64)
    if not use_derivatives:
        return values
    if values.shape[1] < 2:
        raise ValueError("derivatives need series of length >= 2")
    return np.vstack([values, np.vstack([derivative(r) for r in values])])


class KeyCodec:
    """Packs (bigram flag, dim, window length, prev word, word) into int64."""

    def __init__(self, n_dims: int, max_window: int, word_length: int, alphabet_size: int):
        self.n_dims = int(n_dims)
        self.max_window = int(max_window)
        self.word_length = int(word_length)
        self.alphabet_size = int(alphabet_size)
        self.base = self.alphabet_size ** self.word_length
        capacity = 2 * self.n_dims * (self.max_window + 1) * self.base * self.base
        if capacity >= 2 ** 63:
            raise ValueError("feature space too large for 64-bit word keys")

    def params(self) -> dict:
        return dict(n_dims=self.n_dims, max_window=self.max_window,
                    word_length=self.word_length, alphabet_size=self.alphabet_size)

    def encode(self, bigram: bool, dim: int, window_len: int, prev, word) -> np.ndarray:
        head = ((int(bigram) * self.n_dims + dim) * (self.max_window + 1) + window_len)
        return (head * self.base + np.asarray(prev, dtype=np.int64)) * self.base + \
            np.asarray(word, dtype=np.int64)

    def decode(self, key: int) -> WordKey:
        key = int(key)
        key, word = divmod(key, self.base)
        key, prev = divmod(key, self.base)
        key, w = divmod(key, self.max_window + 1)
        flag, dim = divmod(key, self.n_dims)
        lw = effective_word_length(self.word_length, w)
        letters = self._letters(word, lw)
        return WordKey(dim, w, letters, self._letters(prev, lw) if flag else None)

    def encode_key(self, key: WordKey) -> int:
        c = self.alphabet_size

        def code(text):
            v = 0
            for ch in text:
                v = v * c + (ord(ch) - ord("a"))
            return v

        prev = code(key.prev_letters) if key.is_bigram else 0
        return int(self.encode(key.is_bigram, key.dim_id, key.window_len, prev, code(key.letters)))

    def _letters(self, code: int, length: int) -> str:
        out = []
        for _ in range(length):
            code, r = divmod(code, self.alphabet_size)
            out.append(chr(ord("a") + r))
        return "".join(reversed(out))


def build_bag(sample, sfa: SfaModel, cfg: ExtractionConfig) -> BagOfPatterns:
    """Word histogram of one raw sample.

    Derivative streams are appended when ``cfg.use_derivatives``; every
    stream is cut into sliding windows of each configured length, each window
    becomes a unigram and, from the second offset on, a bigram with its
    predecessor.  Window lengths without fitted bins, or longer than the
    sample, contribute nothing.
    """
    values = sample.values if isinstance(sample, MultivariateSeries) else np.atleast_2d(sample)
    streams = prepare_streams(values, cfg.use_derivatives)
    counts: Counter = Counter()
    for d, stream in enumerate(streams):
        key_dim = d if cfg.multivariate_ids else 0
        for w in cfg.window_lengths or ():
            if w > len(stream) or not sfa.has(d, w):
                continue
            words = [letters_to_text(r) for r in sfa.series_letters(d, w, stream)]
            for a, word in enumerate(words):
                counts[WordKey(key_dim, w, word)] += 1
                if cfg.use_bigrams and a > 0:
                    counts[WordKey(key_dim, w, word, prev_letters=words[a - 1])] += 1
    return BagOfPatterns(counts)


class WindowCache:
    """Fourier coefficients of every window of a dataset, per (stream, length).

    Coefficients are kept for the largest word length needed; shorter words
    use a column prefix, so one cache serves every word length up to
    ``max_word_length``.
    """

    def __init__(self, arrays: Sequence[np.ndarray], window_lengths, use_derivatives: bool,
                 max_word_length: int, include_dc: bool = True, normalize_windows: bool = False):
        streams = [prepare_streams(a, use_derivatives) for a in arrays]
        self.n_samples = len(streams)
        self.n_streams = streams[0].shape[0] if streams else 0
        self.window_lengths = tuple(window_lengths)
        self.max_word_length = max_word_length
        self.tables = {}
        for d in range(self.n_streams):
            rows = [s[d] for s in streams]
            for w in self.window_lengths:
                lw = effective_word_length(max_word_length, w)
                table = sliding_fourier_batch(rows, w, lw, include_dc, normalize_windows)
                if table.coefs.shape[0]:
                    self.tables[(d, w)] = table


def fit_sfa_cached(cache: WindowCache, cfg: ExtractionConfig, train_mask=None) -> SfaModel:
    """Fit bins from cached coefficients of the samples in ``train_mask``."""
    sfa = SfaModel(cfg.word_length, cfg.alphabet_size, cfg.binning, cfg.include_dc,
                   cfg.normalize_windows)
    for (d, w), table in cache.tables.items():
        coefs = table.coefs
        if train_mask is not None:
            coefs = coefs[train_mask[table.sample]]
        if coefs.shape[0]:
            sfa.fit_pair(d, w, coefs, cfg.max_bin_samples, cfg.seed)
    return sfa


def extract_keys(cache: WindowCache, sfa: SfaModel, cfg: ExtractionConfig, codec: KeyCodec,
                 sample_mask=None):
    """Packed word keys of all windows in ``cache``.

    Returns ``(sample_index, key)`` arrays with one entry per emitted word.
    """
    samples, keys = [], []
    for (d, w), table in cache.tables.items():
        if not sfa.has(d, w):
            continue
        coefs, sample, offset = table.coefs, table.sample, table.offset
        if sample_mask is not None:
            keep = sample_mask[sample]
            coefs, sample, offset = coefs[keep], sample[keep], offset[keep]
        if not coefs.shape[0]:
            continue
        lw = sfa.length_for(w)
        codes = word_codes(quantize(coefs[:, :lw], sfa.edges[(d, w)]), sfa.alphabet_size)
        key_dim = d if cfg.multivariate_ids else 0
        samples.append(sample)
        keys.append(codec.encode(False, key_dim, w, 0, codes))
        if cfg.use_bigrams:
            has_prev = offset > 0
            idx = np.nonzero(has_prev)[0]
            samples.append(sample[idx])
            keys.append(codec.encode(True, key_dim, w, codes[idx - 1], codes[idx]))
    if not keys:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(samples), np.concatenate(keys)


def bag_order_invariance_check(sample, permuted_sample, sfa: SfaModel, cfg: ExtractionConfig,
                               segments=None) -> bool:
    """Compare unigram counts of windows lying inside swapped segments.

    ``segments`` is ``((start_a, start_b), length)``: ``permuted_sample`` is
    ``sample`` with the two non-overlapping segments exchanged.  Only windows
    fully inside one of the segments are counted, on both sides.  With
    ``segments=None`` the full unigram histograms are compared.
    """
    a = np.atleast_2d(getattr(sample, "values", sample))
    b = np.atleast_2d(getattr(permuted_sample, "values", permuted_sample))
    if a.shape != b.shape:
        return False
    if segments is None:
        spans_a = spans_b = [(0, a.shape[1])]
    else:
        (s1, s2), length = segments
        spans_a = [(s1, length), (s2, length)]
        spans_b = [(s2, length), (s1, length)]
    return _segment_unigrams(a, spans_a, sfa, cfg) == _segment_unigrams(b, spans_b, sfa, cfg)


def _segment_unigrams(values, spans, sfa, cfg) -> Counter:
    streams = prepare_streams(values, cfg.use_derivatives)
    m = values.shape[0]
    counts: Counter = Counter()
    for d, stream in enumerate(streams):
        key_dim = d if cfg.multivariate_ids else 0
        # a derivative value depends on its left neighbour outside the segment
        skip = 1 if d >= m else 0
        for w in cfg.window_lengths or ():
            if not sfa.has(d, w):
                continue
            for start, length in spans:
                if w > length - skip:
                    continue
                seg = stream[start + skip:start + length]
                for row in sfa.series_letters(d, w, seg):
                    counts[(key_dim, w, letters_to_text(row))] += 1
    return counts
