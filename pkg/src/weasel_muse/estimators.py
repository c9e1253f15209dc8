"""scikit-learn style front end for the word-bag classifier."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bop import ExtractionConfig
from .linear import decision_function
from .model import (
    CV_FOLDS,
    WORD_LENGTHS,
    LinearParams,
    fit as fit_model,
    fit_cv,
    transform as transform_model,
)
from .select import DEFAULT_CHI2_THRESHOLD
from .sfa import BINNING_MODES, DEFAULT_ALPHABET
from .validation import as_dataset


class MUSEClassifier(BaseEstimator, ClassifierMixin):
    """Multivariate bag-of-words classifier with logistic regression on top.

    Parameters
    ----------
    word_length, binning : int or None, str or None
        Fixed SFA word length (2, 4 or 6) and binning mode.  ``None``
        selects them by stratified cross-validation on the training data.
    alphabet_size : int
        Letters per coefficient.
    window_lengths : sequence of int or None
        Window lengths; ``None`` uses every length from 4 to the longest
        training sample (every ``window_step``-th one).
    use_bigrams, use_derivatives, multivariate_ids : bool
        Feature-space switches; ``multivariate_ids=False`` drops the
        dimension from word keys.
    normalize_windows, include_dc : bool
        Per-window z-normalization and whether the DC term enters the word.
    chi2_threshold : float
        Minimum chi-squared statistic of a kept feature.
    C, bias, tol : float
        Logistic regression cost, bias feature value and stopping tolerance.
    cv : int
        Number of folds for the word length / binning search.
    random_state : int
        Seed for fold assignment, bin subsampling and the solver.

    Attributes
    ----------
    model_ : MuseModel
    classes_ : ndarray
    """

    def __init__(self, word_length=None, binning=None, alphabet_size=DEFAULT_ALPHABET,
                 window_lengths=None, window_step=1, use_bigrams=True, use_derivatives=True,
                 multivariate_ids=True, normalize_windows=False, include_dc=True,
                 chi2_threshold=DEFAULT_CHI2_THRESHOLD, C=5.0, bias=1.0, tol=0.1,
                 cv=CV_FOLDS, random_state=0):
        self.word_length = word_length
        self.binning = binning
        self.alphabet_size = alphabet_size
        self.window_lengths = window_lengths
        self.window_step = window_step
        self.use_bigrams = use_bigrams
        self.use_derivatives = use_derivatives
        self.multivariate_ids = multivariate_ids
        self.normalize_windows = normalize_windows
        self.include_dc = include_dc
        self.chi2_threshold = chi2_threshold
        self.C = C
        self.bias = bias
        self.tol = tol
        self.cv = cv
        self.random_state = random_state

    def _config(self) -> ExtractionConfig:
        return ExtractionConfig(
            window_lengths=None if self.window_lengths is None else tuple(self.window_lengths),
            alphabet_size=self.alphabet_size,
            use_bigrams=self.use_bigrams,
            use_derivatives=self.use_derivatives,
            multivariate_ids=self.multivariate_ids,
            include_dc=self.include_dc,
            normalize_windows=self.normalize_windows,
            window_step=self.window_step,
            seed=self.random_state,
        )

    def _params(self) -> LinearParams:
        return LinearParams(C=self.C, bias=self.bias, tol=self.tol,
                            chi2_threshold=self.chi2_threshold, seed=self.random_state)

    def fit(self, X, y):
        """Fit on ``X`` (see :func:`~weasel_muse.validation.as_series_list`) and labels ``y``."""
        train = as_dataset(X, y)
        if self.binning is not None and self.binning not in BINNING_MODES:
            raise ValueError(f"binning must be one of {BINNING_MODES} or None")
        cfg, params = self._config(), self._params()
        if self.word_length is not None and self.binning is not None:
            self.model_ = fit_model(train, cfg, self.word_length, self.binning, params)
        else:
            lengths = WORD_LENGTHS if self.word_length is None else (self.word_length,)
            binnings = BINNING_MODES if self.binning is None else (self.binning,)
            self.model_ = fit_cv(train, cfg, self.cv, self.random_state, params,
                                 word_lengths=lengths, binnings=binnings)
        self.classes_ = self.model_.classes
        self.n_dims_ = self.model_.n_dims
        return self

    def _features(self, X):
        check_is_fitted(self, "model_")
        return transform_model(self.model_, as_dataset(X))

    def decision_function(self, X) -> np.ndarray:
        """Per-class scores, shape ``(n_samples, n_classes)``."""
        X = self._features(X)
        return decision_function(self.model_.linear, X)

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def predict_proba(self, X) -> np.ndarray:
        """Normalized per-class logistic outputs."""
        p = 1.0 / (1.0 + np.exp(-self.decision_function(X)))
        return p / p.sum(axis=1, keepdims=True)


class MUSETransformer(TransformerMixin, BaseEstimator):
    """Selected word counts as a sparse matrix (supervised: needs ``y`` to fit).

    Takes the same parameters as :class:`MUSEClassifier`; the fitted
    logistic regression is kept but unused.
    """

    def __init__(self, word_length=4, binning="equi_depth", alphabet_size=DEFAULT_ALPHABET,
                 window_lengths=None, window_step=1, use_bigrams=True, use_derivatives=True,
                 multivariate_ids=True, normalize_windows=False, include_dc=True,
                 chi2_threshold=DEFAULT_CHI2_THRESHOLD, random_state=0):
        self.word_length = word_length
        self.binning = binning
        self.alphabet_size = alphabet_size
        self.window_lengths = window_lengths
        self.window_step = window_step
        self.use_bigrams = use_bigrams
        self.use_derivatives = use_derivatives
        self.multivariate_ids = multivariate_ids
        self.normalize_windows = normalize_windows
        self.include_dc = include_dc
        self.chi2_threshold = chi2_threshold
        self.random_state = random_state

    def fit(self, X, y):
        clf = MUSEClassifier(**self.get_params(), cv=CV_FOLDS)
        clf.fit(X, y)
        self.model_ = clf.model_
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return transform_model(self.model_, as_dataset(X))

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "model_")
        return np.array(self.model_.dictionary.strings(), dtype=object)
