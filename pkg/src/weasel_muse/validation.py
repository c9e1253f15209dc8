"""Input checks for the estimator front end."""
from __future__ import annotations

import numpy as np

from .core import Dataset, MultivariateSeries


def as_series_list(X) -> list:
    """Normalize estimator input to a list of finite ``(m, n_i)`` float arrays.

    Accepts a :class:`Dataset`, a sequence of :class:`MultivariateSeries`,
    a 3-D array ``(N, m, n)``, a 2-D array ``(N, n)`` (univariate), or a
    list of 1-D / 2-D arrays.  All samples must share ``m``.
    """
    if isinstance(X, Dataset):
        return [s.values for s in X]
    if isinstance(X, np.ndarray) and X.dtype != object:
        if X.ndim == 3:
            items = list(X)
        elif X.ndim == 2:
            items = [row[None, :] for row in X]
        else:
            raise ValueError(f"expected a 2-D or 3-D array, got shape {X.shape}")
    else:
        items = list(X)
    out = []
    for s in items:
        if isinstance(s, MultivariateSeries):
            arr = s.values
        else:
            arr = np.asarray(s, dtype=np.float64)
            if arr.ndim == 1:
                arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] == 0:
            raise ValueError(f"each sample must be (m, n) with n >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("input contains NaN or Inf")
        out.append(arr)
    if out:
        m = out[0].shape[0]
        bad = [i for i, a in enumerate(out) if a.shape[0] != m]
        if bad:
            raise ValueError(f"sample {bad[0]} has {out[bad[0]].shape[0]} dimensions, expected {m}")
    return out


def as_dataset(X, y=None) -> Dataset:
    """Wrap estimator input as a :class:`Dataset` (labels from ``y``)."""
    if isinstance(X, Dataset) and y is None:
        return X
    series = as_series_list(X)
    if y is not None:
        y = list(np.asarray(y).tolist())
        if len(y) != len(series):
            raise ValueError(f"X has {len(series)} samples but y has {len(y)}")
    labels = y if y is not None else [None] * len(series)
    return Dataset(MultivariateSeries(a, label=lab, sample_id=str(i))
                   for i, (a, lab) in enumerate(zip(series, labels)))
