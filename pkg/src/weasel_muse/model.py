"""Fit / cross-validate / predict / persist the full word-bag classifier.

Pipeline: derivative streams -> SFA bins per (stream, window length) ->
unigram and bigram bags -> chi-squared filter -> one-vs-rest logistic
regression.
"""
from __future__ import annotations

import io
import json
import logging
import os
import warnings
import zipfile
import zlib
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .bop import (
    ExtractionConfig,
    KeyCodec,
    WindowCache,
    default_window_lengths,
    extract_keys,
    fit_sfa_cached,
)
from .core import Dataset
from .linear import LinearModel, predict_scores, train as train_linear
from .select import (
    DEFAULT_CHI2_THRESHOLD,
    FeatureDictionary,
    count_matrix,
    select_columns,
    vectorize_packed,
)
from .sfa import BINNING_MODES, EQUI_DEPTH, EQUI_FREQUENCY, SfaModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
WORD_LENGTHS = (2, 4, 6)
CV_FOLDS = 10


class ModelFileError(ValueError):
    """Unreadable, truncated or incompatible model file."""


@dataclass(frozen=True)
class LinearParams:
    C: float = 5.0
    bias: float = 1.0
    tol: float = 0.1
    chi2_threshold: float = DEFAULT_CHI2_THRESHOLD
    seed: int = 0


@dataclass
class MuseModel:
    """Everything needed to classify new samples."""

    sfa: SfaModel
    dictionary: FeatureDictionary
    linear: LinearModel
    config: ExtractionConfig
    params: LinearParams
    n_dims: int
    max_length: int
    n_train: int
    n_features_pre: int = 0
    feature_bound: int = 0
    cv_table: list = field(default_factory=list)

    @property
    def classes(self) -> np.ndarray:
        return self.linear.classes

    @property
    def word_length(self) -> int:
        return self.config.word_length

    @property
    def binning(self) -> str:
        return self.config.binning

    @property
    def n_features(self) -> int:
        return len(self.dictionary)


def feature_space_bound(n_samples: int, n_max: int, n_dims: int, alphabet_size: int,
                        word_length: int) -> int:
    """Upper bound on distinct words before selection: min(N n^2, c^(2l) n) * 2m."""
    return min(n_samples * n_max ** 2, alphabet_size ** (2 * word_length) * n_max) * 2 * n_dims


def _codec(cfg: ExtractionConfig, n_streams: int) -> KeyCodec:
    return KeyCodec(n_streams, max(cfg.window_lengths), cfg.word_length, cfg.alphabet_size)


def _resolve(cfg: ExtractionConfig, train: Dataset) -> ExtractionConfig:
    if cfg.window_lengths is None:
        cfg = cfg.with_(window_lengths=default_window_lengths(train, cfg.window_step))
    return cfg


def _check_train(train: Dataset):
    if len(train) == 0:
        raise ValueError("empty training set")
    if not train.is_labelled:
        raise ValueError("training samples must all be labelled")
    if len(train.class_universe) < 2:
        raise ValueError(f"need at least two classes, got {sorted(map(str, train.class_universe))}")
    if train.has_derivatives:
        raise ValueError("pass raw samples; derivatives are added by the pipeline")


def _fit_parts(cache: WindowCache, y, cfg: ExtractionConfig, params: LinearParams,
               train_mask=None, ordered: bool = True):
    """Bins, dictionary and weights from a coefficient cache."""
    sfa = fit_sfa_cached(cache, cfg, train_mask)
    codec = _codec(cfg, cache.n_streams)
    idx = np.arange(cache.n_samples) if train_mask is None else np.nonzero(train_mask)[0]
    rows, keys = extract_keys(cache, sfa, cfg, codec, train_mask)
    # renumber rows to 0..len(idx)-1
    remap = np.full(cache.n_samples, -1, dtype=np.int64)
    remap[idx] = np.arange(len(idx))
    X_all, vocab = count_matrix(remap[rows], keys, len(idx))
    y_fit = np.asarray(y)[idx]
    selected = select_columns(X_all, y_fit, params.chi2_threshold)
    dictionary = FeatureDictionary.from_packed(vocab[selected], codec, ordered=ordered)
    X = vectorize_packed(remap[rows], keys, len(idx), dictionary)
    linear = train_linear(X, y_fit, C=params.C, bias=params.bias, tol=params.tol, seed=params.seed)
    return sfa, dictionary, linear, len(vocab)


def fit(train: Dataset, cfg: ExtractionConfig = ExtractionConfig(), l: Optional[int] = None,
        binning: Optional[str] = None, params: LinearParams = LinearParams()) -> MuseModel:
    """Fit on ``train`` with a fixed word length and binning mode.

    ``l`` and ``binning`` override the values carried by ``cfg``.
    """
    _check_train(train)
    if l is not None:
        cfg = cfg.with_(word_length=int(l))
    if binning is not None:
        cfg = cfg.with_(binning=binning)
    cfg = _resolve(cfg, train)
    cache = WindowCache(train.arrays(), cfg.window_lengths, cfg.use_derivatives,
                        cfg.word_length, cfg.include_dc, cfg.normalize_windows)
    sfa, dictionary, linear, n_pre = _fit_parts(cache, train.labels, cfg, params)
    n_max = int(train.lengths.max())
    bound = feature_space_bound(len(train), n_max, train.n_dims, cfg.alphabet_size,
                                cfg.word_length)
    if n_pre > bound:
        warnings.warn(f"pre-selection feature count {n_pre} exceeds bound {bound}",
                      RuntimeWarning, stacklevel=2)
    logger.info("fitted l=%d %s: %d words, %d selected", cfg.word_length, cfg.binning,
                n_pre, len(dictionary))
    return MuseModel(sfa, dictionary, linear, cfg, params, train.n_dims, n_max, len(train),
                     n_pre, bound)


def _keys_for(model: MuseModel, test: Dataset):
    cfg = model.config
    cache = WindowCache(test.arrays(), cfg.window_lengths, cfg.use_derivatives,
                        cfg.word_length, cfg.include_dc, cfg.normalize_windows)
    n_streams = model.n_dims * (2 if cfg.use_derivatives else 1)
    return extract_keys(cache, model.sfa, cfg, _codec(cfg, n_streams))


def transform(model: MuseModel, test: Dataset):
    """Selected-feature count matrix of ``test`` (sparse, ``N x F``)."""
    if len(test) == 0:
        raise ValueError("empty test set")
    if test.n_dims != model.n_dims:
        raise ValueError(f"model expects {model.n_dims} dimensions, test set has {test.n_dims}")
    rows, keys = _keys_for(model, test)
    return vectorize_packed(rows, keys, len(test), model.dictionary)


def predict_dataset(model: MuseModel, test: Dataset):
    """Predicted labels, and accuracy when ``test`` is labelled (else ``None``)."""
    labels, _ = predict_scores(model.linear, transform(model, test))
    acc = None
    if test.is_labelled:
        acc = float(np.mean([p == t for p, t in zip(labels.tolist(), test.labels)]))
    return labels, acc


def _fold_splits(y, n_folds: int, seed: int):
    y = np.asarray(y)
    n = len(y)
    _, counts = np.unique(y, return_counts=True)
    k = min(n_folds, n)
    if k > counts.max():
        k = int(counts.max())
    k = max(k, 2)
    skf = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return list(skf.split(np.zeros(n), y))


def cross_validate(train: Dataset, cfg: ExtractionConfig = ExtractionConfig(),
                   word_lengths=WORD_LENGTHS, binnings=BINNING_MODES, n_folds: int = CV_FOLDS,
                   seed: int = 0, params: LinearParams = LinearParams()):
    """Grid search word length x binning mode by stratified k-fold accuracy.

    Returns ``(best_l, best_binning, table)`` where ``table`` has one dict
    per (l, binning, fold) with keys ``l, binning, fold, accuracy``.  Ties go
    to the smaller word length, then to equi-depth.
    """
    _check_train(train)
    cfg = _resolve(cfg, train)
    y = np.asarray(train.labels)
    splits = _fold_splits(y, n_folds, seed)
    cache = WindowCache(train.arrays(), cfg.window_lengths, cfg.use_derivatives,
                        max(word_lengths), cfg.include_dc, cfg.normalize_windows)
    table = []
    means = {}
    for l in word_lengths:
        for binning in binnings:
            c = cfg.with_(word_length=l, binning=binning)
            accs = []
            for fold, (tr, te) in enumerate(splits):
                accs.append(_fold_accuracy(cache, y, tr, te, c, params))
                table.append(dict(l=l, binning=binning, fold=fold, accuracy=accs[-1]))
            means[(l, binning)] = float(np.mean(accs))
            logger.info("cv l=%d %s: %.4f", l, binning, means[(l, binning)])
    order = {EQUI_DEPTH: 0, EQUI_FREQUENCY: 1}
    best = min(means, key=lambda k: (-round(means[k], 12), k[0], order.get(k[1], 2)))
    return best[0], best[1], table


def _fold_accuracy(cache, y, tr, te, cfg, params) -> float:
    if len(np.unique(y[tr])) < 2:
        return float(np.mean(y[te] == y[tr][0]))
    mask = np.zeros(cache.n_samples, dtype=bool)
    mask[tr] = True
    sfa, dictionary, linear, _ = _fit_parts(cache, y, cfg, params, mask, ordered=False)
    test_mask = np.zeros(cache.n_samples, dtype=bool)
    test_mask[te] = True
    rows, keys = extract_keys(cache, sfa, cfg, _codec(cfg, cache.n_streams), test_mask)
    remap = np.full(cache.n_samples, -1, dtype=np.int64)
    remap[te] = np.arange(len(te))
    X = vectorize_packed(remap[rows], keys, len(te), dictionary)
    pred, _ = predict_scores(linear, X)
    return float(np.mean(pred == y[te]))


def fit_cv(train: Dataset, cfg: ExtractionConfig = ExtractionConfig(), n_folds: int = CV_FOLDS,
           seed: int = 0, params: LinearParams = LinearParams(), word_lengths=WORD_LENGTHS,
           binnings=BINNING_MODES) -> MuseModel:
    """Cross-validate word length and binning, then refit on all of ``train``."""
    l, binning, table = cross_validate(train, cfg, word_lengths, binnings, n_folds, seed, params)
    model = fit(train, cfg, l, binning, params)
    model.cv_table = table
    return model


# -- persistence -----------------------------------------------------------

def _npy_bytes(arr) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(arr), allow_pickle=False)
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def save_model(model: MuseModel, path) -> None:
    """Write a versioned zip container (JSON metadata + ``.npy`` arrays)."""
    sfa = model.sfa
    pairs = sorted(sfa.edges)
    edge_rows = np.array([sfa.edges[p].shape[0] for p in pairs], dtype=np.int64)
    edges_flat = (np.concatenate([sfa.edges[p].ravel() for p in pairs]) if pairs
                  else np.empty(0))
    meta = {
        "format_version": FORMAT_VERSION,
        "config": {k: _jsonable(v) for k, v in asdict(model.config).items()},
        "params": asdict(model.params),
        "n_dims": model.n_dims,
        "max_length": model.max_length,
        "n_train": model.n_train,
        "n_features_pre": model.n_features_pre,
        "feature_bound": model.feature_bound,
        "classes": [_jsonable(c) for c in model.classes],
        "codec": model.dictionary.codec.params(),
        "linear": {"C": model.linear.C, "bias": model.linear.bias, "tol": model.linear.tol,
                   "n_iter": [int(i) for i in model.linear.n_iter]},
        "cv_table": model.cv_table,
    }
    arrays = {
        "edge_pairs": np.array(pairs, dtype=np.int64).reshape(-1, 2),
        "edge_rows": edge_rows,
        "edges": edges_flat,
        "feature_keys": model.dictionary.packed,
        "coef": model.linear.coef,
        "intercept": model.linear.intercept,
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        info = zipfile.ZipInfo("metadata.json", date_time=(1980, 1, 1, 0, 0, 0))
        info.compress_type = zipfile.ZIP_DEFLATED
        zf.writestr(info, json.dumps(meta, sort_keys=True, indent=1))
        for name, arr in arrays.items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, _npy_bytes(arr))


def load_model(path) -> MuseModel:
    """Read a file written by :func:`save_model`.

    Raises
    ------
    ModelFileError
        If the file is truncated/corrupt or has another format version.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("metadata.json").decode("utf-8"))
            version = meta.get("format_version")
            if version != FORMAT_VERSION:
                raise ModelFileError(
                    f"model format version {version} not supported (expected {FORMAT_VERSION})"
                )
            arr = {n[:-4]: np.load(io.BytesIO(zf.read(n)), allow_pickle=False)
                   for n in zf.namelist() if n.endswith(".npy")}
    except ModelFileError:
        raise
    except (zipfile.BadZipFile, KeyError, ValueError, EOFError, OSError, zlib.error) as exc:
        raise ModelFileError(f"corrupt model file {path}: {exc}") from exc

    try:
        cfg_d = meta["config"]
        if cfg_d.get("window_lengths") is not None:
            cfg_d["window_lengths"] = tuple(cfg_d["window_lengths"])
        cfg = ExtractionConfig(**cfg_d)
        params = LinearParams(**meta["params"])
        sfa = SfaModel(cfg.word_length, cfg.alphabet_size, cfg.binning, cfg.include_dc,
                       cfg.normalize_windows)
        pos = 0
        for (d, w), rows in zip(arr["edge_pairs"], arr["edge_rows"]):
            size = int(rows) * (cfg.alphabet_size - 1)
            sfa.edges[(int(d), int(w))] = arr["edges"][pos:pos + size].reshape(int(rows), -1)
            pos += size
        codec = KeyCodec(**meta["codec"])
        dictionary = FeatureDictionary.from_index_order(arr["feature_keys"], codec)
        classes = np.array(meta["classes"])
        lin = meta["linear"]
        linear = LinearModel(classes, arr["coef"], arr["intercept"], lin["C"], lin["bias"],
                             lin["tol"], lin["n_iter"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"corrupt model file {path}: {exc}") from exc
    return MuseModel(sfa, dictionary, linear, cfg, params, meta["n_dims"], meta["max_length"],
                     meta["n_train"], meta["n_features_pre"], meta["feature_bound"],
                     meta.get("cv_table", []))

