"""Experiment drivers: synthetic data, noise sweep, timing, ablation, reports."""
from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, fields
from typing import List, Optional

import numpy as np

from .bop import ExtractionConfig
from .core import Dataset, MultivariateSeries
from .dtwi import DtwConfig, dtwi_classify
from .ingest import add_gaussian_noise, normalize_dataset
from .model import LinearParams, fit, fit_cv, predict_dataset

# offset between train and test noise seeds so their per-sample streams never collide
TEST_SEED_OFFSET = 2 ** 20

ABLATION_ARMS = (
    ("multivariate+derivatives", True, True),
    ("multivariate", True, False),
    ("univariate+derivatives", False, True),
    ("univariate", False, False),
)


def make_oscillations(n_per_class: int = 25, length: int = 128, n_dims: int = 2,
                      cycles=(8.0, 10.0), jitter: float = 0.05, seed: int = 0,
                      prefix: str = "s") -> Dataset:
    """Two-class synthetic shapes: sine waves with 8 vs 10 cycles per series.

    Every dimension draws its own phase and a cycle count within
    ``±jitter`` of the class value.  Classes alternate, starting with ``"0"``.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, length)
    samples = []
    for i in range(2 * n_per_class):
        c = i % 2
        rows = []
        for _ in range(n_dims):
            f = cycles[c] * rng.uniform(1.0 - jitter, 1.0 + jitter)
            rows.append(np.sin(2.0 * np.pi * (t * f + rng.uniform())))
        samples.append(MultivariateSeries(np.array(rows), label=str(c), sample_id=f"{prefix}{i}"))
    return Dataset(samples)


def parse_levels(text: str) -> List[float]:
    """``"start:stop:step"`` (inclusive stop) or a comma list into noise levels."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"levels must be start:stop:step, got {text!r}")
        start, stop, step = map(float, parts)
        if step <= 0:
            raise ValueError("level step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        levels = [round(start + k * step, 10) for k in range(max(n, 0))]
    else:
        levels = [float(v) for v in text.split(",") if v.strip()]
    if not levels or any(v < 0 for v in levels):
        raise ValueError(f"need non-negative noise levels, got {text!r}")
    return levels


@dataclass
class RunRecord:
    dataset: str
    method: str
    config: str
    accuracy: Optional[float]
    train_time_ms: float
    predict_time_ms: float
    peak_feature_count: int


class RunReport:
    """CSV-backed list of completed runs; times are process CPU time."""

    columns = [f.name for f in fields(RunRecord)]

    def __init__(self):
        self.rows: List[RunRecord] = []

    def add(self, record: RunRecord) -> RunRecord:
        self.rows.append(record)
        return record

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.columns)
            w.writeheader()
            for r in self.rows:
                w.writerow(asdict(r))


def _describe(model) -> str:
    cfg = model.config
    return (f"l={cfg.word_length};binning={cfg.binning};bigrams={int(cfg.use_bigrams)};"
            f"derivatives={int(cfg.use_derivatives)};multivariate={int(cfg.multivariate_ids)}")


def run_muse(train: Dataset, test: Dataset, cfg: ExtractionConfig = ExtractionConfig(),
             l: Optional[int] = None, binning: Optional[str] = None,
             params: LinearParams = LinearParams(), seed: int = 0, name: str = "") -> tuple:
    """Fit (cross-validating when ``l``/``binning`` are missing) and evaluate.

    Returns ``(record, model, predicted_labels)``.
    """
    t0 = time.process_time()
    if l is not None and binning is not None:
        model = fit(train, cfg, l, binning, params)
    else:
        kw = {}
        if l is not None:
            kw["word_lengths"] = (l,)
        if binning is not None:
            kw["binnings"] = (binning,)
        model = fit_cv(train, cfg, seed=seed, params=params, **kw)
    t1 = time.process_time()
    labels, acc = predict_dataset(model, test)
    t2 = time.process_time()
    rec = RunRecord(name, "muse", _describe(model), acc, 1000 * (t1 - t0), 1000 * (t2 - t1),
                    model.n_features_pre)
    return rec, model, labels


def run_dtwi(train: Dataset, test: Dataset, cfg: DtwConfig = DtwConfig(), name: str = ""):
    """1-NN DTWi evaluation; returns ``(record, predicted_labels)``."""
    t0 = time.process_time()
    labels, acc = dtwi_classify(train, test, cfg)
    t1 = time.process_time()
    config = f"window={cfg.window};normalize={int(cfg.normalize)}"
    return RunRecord(name, "dtwi", config, acc, 0.0, 1000 * (t1 - t0), 0), labels


def noise_sweep(train: Dataset, test: Dataset, levels, seed: int = 0,
                cfg: ExtractionConfig = ExtractionConfig(), params: LinearParams = LinearParams(),
                dtw: DtwConfig = DtwConfig(), l: Optional[int] = None,
                binning: Optional[str] = None) -> list:
    """MUSE and DTWi accuracy per Gaussian noise level.

    Streams are normalized to unit SD once, then noise of each level is
    added to train and test.  Returns dicts with ``level, muse_acc, dtwi_acc``.
    """
    train, test = normalize_dataset(train), normalize_dataset(test)
    rows = []
    for level in levels:
        tr = add_gaussian_noise(train, level, seed)
        te = add_gaussian_noise(test, level, seed + TEST_SEED_OFFSET)
        muse, _, _ = run_muse(tr, te, cfg, l, binning, params, seed)
        dt, _ = run_dtwi(tr, te, dtw)
        rows.append(dict(level=level, muse_acc=muse.accuracy, dtwi_acc=dt.accuracy))
    return rows


def benchmark(train: Dataset, test: Dataset, cfg: ExtractionConfig = ExtractionConfig(),
              l: Optional[int] = None, binning: Optional[str] = None,
              params: LinearParams = LinearParams(), dtw: DtwConfig = DtwConfig(),
              seed: int = 0, name: str = "") -> dict:
    """CPU prediction time of MUSE vs DTWi on ``test``.

    Returns ``muse_ms``, ``dtwi_ms``, ``ratio = dtwi_ms / muse_ms`` and both
    run records.
    """
    muse, _, _ = run_muse(train, test, cfg, l, binning, params, seed, name)
    dt, _ = run_dtwi(train, test, dtw, name)
    muse_ms, dtwi_ms = muse.predict_time_ms, dt.predict_time_ms
    ratio = dtwi_ms / muse_ms if muse_ms > 0 else float("inf")
    return dict(muse_ms=muse_ms, dtwi_ms=dtwi_ms, ratio=ratio, muse=muse, dtwi=dt)


def ablation(train: Dataset, test: Dataset, cfg: ExtractionConfig = ExtractionConfig(),
             l: Optional[int] = None, binning: Optional[str] = None,
             params: LinearParams = LinearParams(), seed: int = 0, name: str = "") -> list:
    """Accuracy of the four (dimension ids, derivatives) arms.

    Returns ``(arm_name, RunRecord)`` pairs in :data:`ABLATION_ARMS` order.
    """
    out = []
    for arm, multivariate, derivatives in ABLATION_ARMS:
        c = cfg.with_(multivariate_ids=multivariate, use_derivatives=derivatives)
        rec, _, _ = run_muse(train, test, c, l, binning, params, seed, name)
        rec.method = f"muse[{arm}]"
        out.append((arm, rec))
    return out
