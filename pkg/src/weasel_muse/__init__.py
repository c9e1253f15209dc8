"""Multivariate time series classification with symbolic word bags.

Each dimension (plus its derivative stream) is cut into windows of many
lengths, every window becomes an SFA word keyed by dimension and window
length, unigram and bigram counts are filtered by chi-squared, and a
one-vs-rest logistic regression classifies the resulting sparse vectors.
A dimension-independent DTW 1-NN baseline is included for comparison.
"""
from .bop import ExtractionConfig, build_bag
from .core import BagOfPatterns, Dataset, MultivariateSeries, WordKey
from .dtwi import DTWiClassifier, DtwConfig, dtw_distance, dtwi_classify, dtwi_distance
from .estimators import MUSEClassifier, MUSETransformer
from .ingest import DatasetFormatError, load_dataset, save_dataset
from .model import (
    LinearParams,
    ModelFileError,
    MuseModel,
    cross_validate,
    fit,
    fit_cv,
    load_model,
    predict_dataset,
    save_model,
    transform,
)

__version__ = "0.1.0"

__all__ = [
    "BagOfPatterns",
    "DTWiClassifier",
    "Dataset",
    "DatasetFormatError",
    "DtwConfig",
    "ExtractionConfig",
    "LinearParams",
    "MUSEClassifier",
    "MUSETransformer",
    "ModelFileError",
    "MultivariateSeries",
    "MuseModel",
    "WordKey",
    "build_bag",
    "cross_validate",
    "dtw_distance",
    "dtwi_classify",
    "dtwi_distance",
    "fit",
    "fit_cv",
    "load_dataset",
    "load_model",
    "predict_dataset",
    "save_dataset",
    "save_model",
    "transform",
]
