"""Dimension-independent DTW (DTWi) 1-nearest-neighbour baseline.

The distance of two samples is the sum over dimensions of univariate DTW
with squared pointwise cost (no final square root) and a Sakoe-Chiba band.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .core import Dataset
from .ingest import z_normalize
from .validation import as_series_list


@dataclass(frozen=True)
class DtwConfig:
    """``window`` is the band width as a fraction of the longer series."""

    window: float = 1.0
    normalize: bool = True
    pruning: bool = True

    def __post_init__(self):
        if not 0.0 < self.window <= 1.0:
            raise ValueError(f"warping window fraction must be in (0, 1], got {self.window}")


def band_radius(len_a: int, len_b: int, window: float) -> int:
    # full band at window=1, diagonal-only as window -> 0
    r = math.ceil(window * max(len_a, len_b)) - 1
    return max(r, abs(len_a - len_b))


@njit(cache=True)
def _dtw(a, b, radius, cutoff):
    """Banded DTW; returns ``inf`` once every cell of a row exceeds ``cutoff``."""
    la = a.shape[0]
    lb = b.shape[0]
    inf = np.inf
    prev = np.full(lb + 1, inf)
    cur = np.full(lb + 1, inf)
    prev[0] = 0.0
    for i in range(1, la + 1):
        cur[:] = inf
        lo = max(1, i - radius)
        hi = min(lb, i + radius)
        row_min = inf
        for j in range(lo, hi + 1):
            d = a[i - 1] - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            v = d * d + best
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min > cutoff:
            return inf
        prev, cur = cur, prev
    return prev[lb]


@njit(cache=True)
def _envelope_bound(a, b_min, b_max):
    # every point of a is matched to some point of b
    s = 0.0
    for x in a:
        if x > b_max:
            s += (x - b_max) ** 2
        elif x < b_min:
            s += (b_min - x) ** 2
    return s


def dtw_distance(a, b, window: float = 1.0) -> float:
    """DTW with squared pointwise cost; ``window`` is the Sakoe-Chiba fraction."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW needs non-empty series")
    if not 0.0 < window <= 1.0:
        raise ValueError(f"warping window fraction must be in (0, 1], got {window}")
    return float(_dtw(a, b, band_radius(len(a), len(b), window), np.inf))


def _prepare(values, normalize: bool) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if normalize:
        return np.vstack([z_normalize(r) for r in values])
    return np.ascontiguousarray(values)


def dtwi_distance(A, B, cfg: DtwConfig = DtwConfig()) -> float:
    """Sum of per-dimension DTW distances (series normalized first if ``cfg.normalize``)."""
    A = _prepare(getattr(A, "values", A), cfg.normalize)
    B = _prepare(getattr(B, "values", B), cfg.normalize)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape[0]} vs {B.shape[0]}")
    return float(sum(_dtw(a, b, band_radius(len(a), len(b), cfg.window), np.inf)
                     for a, b in zip(A, B)))


def _nearest(query, train, envelopes, cfg: DtwConfig):
    best = np.inf
    best_i = 0
    for i, ref in enumerate(train):
        if cfg.pruning and np.isfinite(best):
            lb = 0.0
            for d in range(query.shape[0]):
                lb += _envelope_bound(query[d], envelopes[i][0][d], envelopes[i][1][d])
            if lb >= best:
                continue
        total = 0.0
        for d in range(query.shape[0]):
            r = band_radius(query.shape[1], ref.shape[1], cfg.window)
            cutoff = best - total if cfg.pruning else np.inf
            total += _dtw(query[d], ref[d], r, cutoff)
            if total >= best:
                break
        if total < best:
            best = total
            best_i = i
    return best_i, best


def dtwi_classify(train: Dataset, test: Dataset, cfg: DtwConfig = DtwConfig()):
    """1-NN labels of ``test``; accuracy when ``test`` is labelled (else ``None``).

    Ties go to the earliest training sample.  Pruning (envelope lower bound
    and early abandoning) never changes a label.
    """
    if len(train) == 0:
        raise ValueError("empty training set")
    if len(test) and test.n_dims != train.n_dims:
        raise ValueError(f"dimension mismatch: train {train.n_dims}, test {test.n_dims}")
    refs = [_prepare(s.values, cfg.normalize) for s in train]
    env = [(r.min(axis=1), r.max(axis=1)) for r in refs]
    labels = [s.label for s in train]
    pred = []
    for s in test:
        i, _ = _nearest(_prepare(s.values, cfg.normalize), refs, env, cfg)
        pred.append(labels[i])
    pred = np.array(pred, dtype=object)
    acc = None
    if len(test) and test.is_labelled:
        acc = float(np.mean([p == t for p, t in zip(pred, test.labels)]))
    return pred, acc


class DTWiClassifier(BaseEstimator, ClassifierMixin):
    """scikit-learn wrapper around :func:`dtwi_classify`.

    ``X`` is a list of ``(m, n_i)`` arrays, a 3-D array or a :class:`Dataset`.
    """

    def __init__(self, window=1.0, normalize=True, pruning=True):
        self.window = window
        self.normalize = normalize
        self.pruning = pruning

    def fit(self, X, y):
        series = as_series_list(X)
        y = np.asarray(y)
        if len(series) != len(y):
            raise ValueError("X and y differ in length")
        if len(series) == 0:
            raise ValueError("empty training set")
        self.config_ = DtwConfig(self.window, self.normalize, self.pruning)
        self.train_ = [_prepare(s, self.normalize) for s in series]
        self.envelopes_ = [(r.min(axis=1), r.max(axis=1)) for r in self.train_]
        self.y_ = y
        self.classes_ = np.unique(y)
        self.n_dims_ = self.train_[0].shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "train_")
        out = []
        for s in as_series_list(X):
            if s.shape[0] != self.n_dims_:
                raise ValueError(f"expected {self.n_dims_} dimensions, got {s.shape[0]}")
            i, _ = _nearest(_prepare(s, self.normalize), self.train_, self.envelopes_,
                            self.config_)
            out.append(self.y_[i])
        return np.asarray(out)
