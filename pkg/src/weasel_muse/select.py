"""Chi-squared filtering of the joint word space and the feature dictionary."""
from __future__ import annotations

import warnings
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .core import BagOfPatterns, WordKey, canonical_key_string

DEFAULT_CHI2_THRESHOLD = 2.0


def chi2_scores(class_counts, class_totals) -> np.ndarray:
    """Chi-squared independence statistic for many features at once.

    Parameters
    ----------
    class_counts : array, shape (n_classes, n_features)
        Summed occurrence count of each feature within each class.
    class_totals : array, shape (n_classes,)
        Total word count of each class.

    Each feature is scored on the 2 x n_classes table (feature count vs. the
    rest of the class's words) with expected cells from the class totals.
    Classes with a zero total, and cells with zero expectation, are left out.
    """
    obs = np.asarray(class_counts, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs[:, None]
    totals = np.asarray(class_totals, dtype=np.float64)
    keep = totals > 0
    obs, totals = obs[keep], totals[keep]
    grand = totals.sum()
    if grand <= 0:
        return np.zeros(obs.shape[1])
    feat = obs.sum(axis=0)
    exp_f = totals[:, None] * (feat / grand)[None, :]
    exp_r = totals[:, None] * ((grand - feat) / grand)[None, :]
    dev2 = (obs - exp_f) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        part_f = np.where(exp_f > 0, dev2 / exp_f, 0.0)
        part_r = np.where(exp_r > 0, dev2 / exp_r, 0.0)
    return (part_f + part_r).sum(axis=0)


def chi2_statistic(feature_counts_per_class, class_totals) -> float:
    """Statistic of one feature; see :func:`chi2_scores`."""
    counts = np.asarray(feature_counts_per_class, dtype=np.float64)
    if np.count_nonzero(np.asarray(class_totals) > 0) < 2:
        raise ValueError("chi-squared needs at least two classes with words")
    return float(chi2_scores(counts[:, None], class_totals)[0])


class FeatureDictionary:
    """Selected word keys mapped to contiguous column indices.

    Indices follow the lexicographic order of the canonical key text.  When
    built from packed integer keys the dictionary also maps packed keys.
    """

    def __init__(self, keys: Iterable[WordKey]):
        keys = sorted(set(keys), key=canonical_key_string)
        self._keys = keys
        self._index = {k: i for i, k in enumerate(keys)}
        self.codec = None
        self.packed = None
        self._sorted_packed = None
        self._sorted_pos = None

    @classmethod
    def from_packed(cls, packed, codec, ordered: bool = True) -> "FeatureDictionary":
        """Dictionary over integer-packed keys.

        ``ordered=False`` keeps numeric key order and skips decoding, for
        throw-away dictionaries inside cross-validation.
        """
        packed = np.unique(np.asarray(packed, dtype=np.int64))
        keys = None
        if ordered and len(packed):
            keys = [codec.decode(k) for k in packed]
            order = sorted(range(len(keys)), key=lambda i: canonical_key_string(keys[i]))
            keys = [keys[i] for i in order]
            packed = packed[np.array(order, dtype=np.int64)]
        return cls.from_index_order(packed, codec, keys)

    @classmethod
    def from_index_order(cls, packed, codec, keys=None) -> "FeatureDictionary":
        """Dictionary whose column ``i`` is the packed key ``packed[i]``."""
        self = cls.__new__(cls)
        self.codec = codec
        self.packed = np.asarray(packed, dtype=np.int64)
        self._keys = keys
        self._index = None if keys is None else {k: i for i, k in enumerate(keys)}
        srt = np.argsort(self.packed, kind="stable")
        self._sorted_packed = self.packed[srt]
        self._sorted_pos = srt
        return self

    def __len__(self) -> int:
        return len(self.packed) if self.packed is not None else len(self._keys)

    def __contains__(self, key: WordKey) -> bool:
        return key in self._mapping()

    def __iter__(self):
        return iter(self.keys())

    def _mapping(self):
        if self._index is None:
            self._keys = [self.codec.decode(k) for k in self.packed]
            self._index = {k: i for i, k in enumerate(self._keys)}
        return self._index

    def keys(self) -> list:
        self._mapping()
        return list(self._keys)

    def index(self, key: WordKey) -> int:
        return self._mapping()[key]

    def get(self, key: WordKey, default=None):
        return self._mapping().get(key, default)

    def strings(self) -> list:
        return [canonical_key_string(k) for k in self.keys()]

    def lookup_packed(self, packed) -> np.ndarray:
        """Column of each packed key, ``-1`` when not selected."""
        packed = np.asarray(packed, dtype=np.int64)
        if self._sorted_packed is None or len(self._sorted_packed) == 0:
            return np.full(packed.shape, -1, dtype=np.int64)
        pos = np.searchsorted(self._sorted_packed, packed)
        pos = np.minimum(pos, len(self._sorted_packed) - 1)
        hit = self._sorted_packed[pos] == packed
        return np.where(hit, self._sorted_pos[pos], -1)


def count_matrix(sample_idx, keys, n_samples: int):
    """Sparse ``(n_samples, n_distinct_keys)`` count matrix and its key vocabulary."""
    vocab, cols = np.unique(keys, return_inverse=True)
    data = np.ones(len(keys), dtype=np.float64)
    X = sp.csr_matrix((data, (sample_idx, cols.ravel())), shape=(n_samples, len(vocab)))
    X.sum_duplicates()
    return X, vocab


def class_sums(X, y, classes):
    """Per-class summed feature counts and per-class word totals."""
    y = np.asarray(y)
    ind = sp.csr_matrix(
        (np.ones(len(y)), (np.searchsorted(classes, y), np.arange(len(y)))),
        shape=(len(classes), len(y)),
    )
    counts = np.asarray((ind @ X).todense())
    return counts, counts.sum(axis=1)


def select_columns(X, y, threshold: float = DEFAULT_CHI2_THRESHOLD) -> np.ndarray:
    """Indices of columns of ``X`` whose statistic reaches ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    classes = np.unique(np.asarray(y))
    counts, totals = class_sums(X, y, classes)
    scores = chi2_scores(counts, totals)
    selected = np.nonzero(scores >= threshold)[0]
    if selected.size == 0 and X.shape[1]:
        warnings.warn(
            f"no feature reached chi-squared {threshold}; keeping all {X.shape[1]} features",
            RuntimeWarning,
            stacklevel=2,
        )
        selected = np.arange(X.shape[1])
    return selected


def select_features(train_bags: Sequence[BagOfPatterns], labels,
                    threshold: float = DEFAULT_CHI2_THRESHOLD) -> FeatureDictionary:
    """Keep the keys whose chi-squared statistic is at least ``threshold``."""
    if len(train_bags) != len(labels):
        raise ValueError("bags and labels differ in length")
    vocab = sorted({k for bag in train_bags for k in bag}, key=canonical_key_string)
    col = {k: i for i, k in enumerate(vocab)}
    rows, cols, vals = [], [], []
    for i, bag in enumerate(train_bags):
        for k, v in bag.items():
            rows.append(i)
            cols.append(col[k])
            vals.append(v)
    X = sp.csr_matrix((vals, (rows, cols)), shape=(len(train_bags), len(vocab)), dtype=np.float64)
    keep = select_columns(X, labels, threshold)
    return FeatureDictionary(vocab[i] for i in keep)


def vectorize(bag: BagOfPatterns, dictionary: FeatureDictionary):
    """Raw counts of the selected keys as a ``1 x F`` sparse row."""
    cols, vals = [], []
    for k, v in bag.items():
        i = dictionary.get(k)
        if i is not None:
            cols.append(i)
            vals.append(float(v))
    order = np.argsort(cols, kind="stable")
    return sp.csr_matrix(
        (np.asarray(vals)[order], np.asarray(cols, dtype=np.int64)[order], [0, len(cols)]),
        shape=(1, len(dictionary)),
    )


def vectorize_packed(sample_idx, keys, n_samples: int, dictionary: FeatureDictionary):
    """Sparse count matrix of packed keys restricted to ``dictionary``."""
    cols = dictionary.lookup_packed(keys)
    hit = cols >= 0
    X = sp.csr_matrix(
        (np.ones(int(hit.sum())), (np.asarray(sample_idx)[hit], cols[hit])),
        shape=(n_samples, len(dictionary)),
    )
    X.sum_duplicates()
    return X
