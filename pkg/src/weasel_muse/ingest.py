"""Dataset file I/O and the preprocessing applied before word extraction.

File format: one record per (sample, dimension)::

    <sample_id>,<dim_id>,<label>,<v1>,<v2>,...,<vk>

UTF-8, newline terminated, ``#`` starts a comment line.  All records of a
sample share its label and value count; dim ids run ``0..m-1``.
"""
from __future__ import annotations

import logging
import os
from collections import OrderedDict

import numpy as np

from .core import Dataset, MultivariateSeries

logger = logging.getLogger(__name__)

ZERO_STD = 1e-8


class DatasetFormatError(ValueError):
    """Raised for malformed or structurally inconsistent dataset files."""


def load_dataset(path: str | os.PathLike) -> Dataset:
    """Read a dataset file.

    Samples keep the first-appearance order of their ids.  An empty label
    field marks an unlabelled sample.

    Raises
    ------
    DatasetFormatError
        On a malformed line (message carries the line number), on
        inconsistent labels, lengths or dimension ids within a sample, or when
        the file holds no samples.
    """
    records: "OrderedDict[str, dict]" = OrderedDict()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) < 4:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected '<sample_id>,<dim_id>,<label>,<values...>'"
                )
            sid, dim_txt, label = parts[0].strip(), parts[1].strip(), parts[2].strip()
            if not sid:
                raise DatasetFormatError(f"{path}:{lineno}: empty sample id")
            try:
                dim = int(dim_txt)
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: bad dimension id {dim_txt!r}") from None
            try:
                values = np.array([float(v) for v in parts[3:]], dtype=np.float64)
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            if not np.all(np.isfinite(values)):
                raise DatasetFormatError(f"{path}:{lineno}: non-finite value")
            rec = records.setdefault(sid, {"label": label, "dims": {}})
            if rec["label"] != label:
                raise DatasetFormatError(
                    f"sample {sid!r}: conflicting labels {rec['label']!r} and {label!r}"
                )
            if dim in rec["dims"]:
                raise DatasetFormatError(f"sample {sid!r}: dimension {dim} given twice")
            rec["dims"][dim] = values

    if not records:
        raise DatasetFormatError(f"{path}: no samples")

    samples = []
    m = None
    for sid, rec in records.items():
        dims = rec["dims"]
        if sorted(dims) != list(range(len(dims))):
            raise DatasetFormatError(
                f"sample {sid!r}: dimension ids must be 0..m-1, got {sorted(dims)}"
            )
        lengths = {len(v) for v in dims.values()}
        if len(lengths) != 1:
            raise DatasetFormatError(
                f"sample {sid!r}: dimensions have different lengths {sorted(lengths)}"
            )
        if m is None:
            m = len(dims)
        elif len(dims) != m:
            raise DatasetFormatError(f"sample {sid!r}: has {len(dims)} dimensions, expected {m}")
        values = np.vstack([dims[d] for d in range(len(dims))])
        label = rec["label"] or None
        samples.append(MultivariateSeries(values, label=label, sample_id=sid))
    return Dataset(samples)


def save_dataset(ds: Dataset, path: str | os.PathLike) -> None:
    """Write ``ds`` in the record format (``repr`` floats, lossless)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, s in enumerate(ds):
            sid = s.sample_id if s.sample_id is not None else str(i)
            label = "" if s.label is None else str(s.label)
            if "," in sid or "," in label:
                raise ValueError(f"sample id / label may not contain commas: {sid!r}, {label!r}")
            for d, row in enumerate(s.values):
                fh.write(f"{sid},{d},{label},{','.join(repr(float(v)) for v in row)}\n")


def z_normalize(window) -> np.ndarray:
    """Shift and scale to mean 0 and population standard deviation 1.

    Windows with standard deviation below ``1e-8`` map to all zeros.
    """
    x = np.asarray(window, dtype=np.float64)
    mu = x.mean()
    sd = x.std()
    if sd < ZERO_STD:
        return np.zeros_like(x)
    return (x - mu) / sd


def derivative(stream) -> np.ndarray:
    """Absolute first differences, left-padded with one zero (keeps length)."""
    x = np.asarray(stream, dtype=np.float64)
    out = np.empty_like(x)
    out[0] = 0.0
    np.abs(np.diff(x), out=out[1:])
    return out


def add_derivatives(ds: Dataset) -> Dataset:
    """Append the derivative of every stream as dims ``m..2m-1``."""
    if ds.has_derivatives:
        raise ValueError("dataset already carries derivative streams")
    out = []
    for s in ds:
        if s.length < 2:
            raise ValueError(f"sample {s.sample_id!r}: derivatives need length >= 2")
        deriv = np.vstack([derivative(row) for row in s.values])
        out.append(
            MultivariateSeries(np.vstack([s.values, deriv]), label=s.label, sample_id=s.sample_id)
        )
    return Dataset(out, has_derivatives=True)


def normalize_dataset(ds: Dataset) -> Dataset:
    """z-normalize every whole stream of every sample."""
    out = [
        MultivariateSeries(
            np.vstack([z_normalize(row) for row in s.values]), label=s.label, sample_id=s.sample_id
        )
        for s in ds
    ]
    return Dataset(out, has_derivatives=ds.has_derivatives)


def add_gaussian_noise(ds: Dataset, sd: float, seed: int) -> Dataset:
    """Perturb every value with independent ``Normal(0, sd**2)`` noise.

    Sample ``i`` draws from a generator seeded with ``seed ^ i``.
    """
    if sd < 0:
        raise ValueError(f"noise standard deviation must be >= 0, got {sd}")
    if sd == 0:
        return ds
    out = []
    for i, s in enumerate(ds):
        rng = np.random.default_rng(int(seed) ^ i)
        noisy = s.values + rng.normal(0.0, sd, size=s.values.shape)
        out.append(MultivariateSeries(noisy, label=s.label, sample_id=s.sample_id))
    return Dataset(out, has_derivatives=ds.has_derivatives)
