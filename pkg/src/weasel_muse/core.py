"""Domain types shared across the package.

Samples are stored as 2-D float arrays of shape ``(m, n)``: one row per
synchronized stream.  Word keys identify a feature by stream, window length
and SFA letters; their canonical text form is ``d<dim>_w<len>_<letters>``
(unigram) or ``d<dim>_w<len>_<prev>_<letters>`` (bigram).
"""
from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Hashable, Optional

import numpy as np

__all__ = [
    "MultivariateSeries",
    "Dataset",
    "WordKey",
    "BagOfPatterns",
    "canonical_key_string",
    "parse_key_string",
]

_KEY_RE = re.compile(r"^d(\d+)_w(\d+)_([a-z]+)(?:_([a-z]+))?$")


@dataclass(frozen=True, eq=False)
class MultivariateSeries:
    """One sample: ``m`` synchronized streams of equal length ``n``."""

    values: np.ndarray
    label: Optional[Hashable] = None
    sample_id: Optional[str] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"a sample needs shape (m >= 1, n >= 1), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"sample {self.sample_id!r} contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n_dims(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def dimension(self, i: int) -> np.ndarray:
        return self.values[i]


@dataclass(frozen=True, eq=False)
class Dataset:
    """A list of samples sharing the same number of streams."""

    samples: tuple
    class_universe: frozenset = field(default=frozenset())
    has_derivatives: bool = False

    def __init__(self, samples: Iterable[MultivariateSeries], has_derivatives: bool = False):
        samples = tuple(samples)
        if samples:
            m = samples[0].n_dims
            for s in samples:
                if s.n_dims != m:
                    raise ValueError(
                        f"sample {s.sample_id!r} has {s.n_dims} dimensions, expected {m}"
                    )
        universe = frozenset(s.label for s in samples if s.label is not None)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "class_universe", universe)
        object.__setattr__(self, "has_derivatives", bool(has_derivatives))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[MultivariateSeries]:
        return iter(self.samples)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Dataset(self.samples[i], has_derivatives=self.has_derivatives)
        return self.samples[i]

    def subset(self, indices) -> "Dataset":
        return Dataset([self.samples[i] for i in indices], has_derivatives=self.has_derivatives)

    @property
    def n_dims(self) -> int:
        if not self.samples:
            raise ValueError("empty dataset has no dimension count")
        return self.samples[0].n_dims

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.samples], dtype=np.int64)

    @property
    def labels(self) -> list:
        return [s.label for s in self.samples]

    @property
    def is_labelled(self) -> bool:
        return bool(self.samples) and all(s.label is not None for s in self.samples)

    def arrays(self) -> list[np.ndarray]:
        return [s.values for s in self.samples]


@dataclass(frozen=True)
class WordKey:
    """Identifier of one bag-of-patterns feature.

    ``letters`` and ``prev_letters`` are strings over ``'a'..``; a key with
    ``prev_letters`` set is a bigram of two adjacent windows.
    """

    dim_id: int
    window_len: int
    letters: str
    prev_letters: Optional[str] = None

    def __post_init__(self):
        if self.dim_id < 0:
            raise ValueError("dim_id must be non-negative")
        if self.window_len < 1:
            raise ValueError("window_len must be positive")
        if not self.letters or not self.letters.isalpha() or not self.letters.islower():
            raise ValueError(f"invalid letters {self.letters!r}")
        if self.prev_letters is not None and len(self.prev_letters) != len(self.letters):
            raise ValueError("bigram halves must have equal length")

    @property
    def is_bigram(self) -> bool:
        return self.prev_letters is not None

    def __str__(self) -> str:
        return canonical_key_string(self)


def canonical_key_string(key: WordKey) -> str:
    if key.prev_letters is None:
        return f"d{key.dim_id}_w{key.window_len}_{key.letters}"
    return f"d{key.dim_id}_w{key.window_len}_{key.prev_letters}_{key.letters}"


def parse_key_string(text: str) -> WordKey:
    """Inverse of :func:`canonical_key_string`."""
    m = _KEY_RE.match(text)
    if m is None:
        raise ValueError(f"not a canonical word key: {text!r}")
    dim, w, first, second = m.groups()
    if second is None:
        return WordKey(int(dim), int(w), first)
    return WordKey(int(dim), int(w), second, prev_letters=first)


class BagOfPatterns(Mapping):
    """Sparse word histogram of one sample (``WordKey -> count``).

    Zero counts are never stored.  ``a + b`` merges two bags.
    """

    __slots__ = ("_counts",)

    def __init__(self, counts: Optional[Mapping] = None):
        data = {}
        if counts:
            for k, v in counts.items():
                v = int(v)
                if v < 0:
                    raise ValueError(f"negative count for {k}")
                if v:
                    data[k] = v
        self._counts = data

    def __getitem__(self, key):
        return self._counts[key]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __eq__(self, other):
        if isinstance(other, BagOfPatterns):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __add__(self, other: "BagOfPatterns") -> "BagOfPatterns":
        merged = dict(self._counts)
        for k, v in other.items():
            merged[k] = merged.get(k, 0) + v
        return BagOfPatterns(merged)

    def __repr__(self):
        items = sorted(self._counts.items(), key=lambda kv: str(kv[0]))[:5]
        shown = ", ".join(f"{k}: {v}" for k, v in items)
        more = ", ..." if len(self._counts) > 5 else ""
        return f"BagOfPatterns({{{shown}{more}}})"

    def total(self) -> int:
        return sum(self._counts.values())

    def restrict(self, predicate) -> "BagOfPatterns":
        return BagOfPatterns({k: v for k, v in self._counts.items() if predicate(k)})
