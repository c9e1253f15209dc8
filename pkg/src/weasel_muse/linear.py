"""Sparse L2-regularized logistic regression, one weight vector per class.

Per binary problem the primal objective is::

    0.5 * ||w||^2 + C * sum_i log(1 + exp(-y_i * w . x~_i))

where ``x~`` is ``x`` extended by the constant bias feature ``B`` (its
weight is regularized like the others).  The solver is dual coordinate
descent with a Newton step per coordinate; it stops once the largest
dual-gradient magnitude of an outer pass drops below ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from numba import njit

MAX_ITER = 1000
_MAX_INNER = 100
_ETA = 0.1


@njit(cache=True)
def _dual_objective(w, alpha, C):
    obj = 0.5 * np.dot(w, w)
    n = alpha.shape[0] // 2
    for i in range(n):
        a = alpha[2 * i]
        b = alpha[2 * i + 1]
        if a > 0.0:
            obj += a * np.log(a)
        if b > 0.0:
            obj += b * np.log(b)
        obj -= C * np.log(C)
    return obj


@njit(cache=True)
def _solve_dual(indptr, indices, data, bias, y, C, eps, max_iter, seed, w, history):
    n = y.shape[0]
    n_feat = w.shape[0] - (1 if bias > 0.0 else 0)
    qd = np.empty(n)
    for i in range(n):
        s = bias * bias
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * data[p]
        qd[i] = s

    alpha = np.empty(2 * n)
    for i in range(n):
        alpha[2 * i] = min(0.001 * C, 1e-8)
        alpha[2 * i + 1] = C - alpha[2 * i]
    w[:] = 0.0
    for i in range(n):
        coef = y[i] * alpha[2 * i]
        for p in range(indptr[i], indptr[i + 1]):
            w[indices[p]] += coef * data[p]
        if bias > 0.0:
            w[n_feat] += coef * bias

    np.random.seed(seed)
    order = np.arange(n)
    inner_eps = 1e-2
    inner_eps_min = min(1e-8, eps)
    it = 0
    while it < max_iter:
        np.random.shuffle(order)
        newton_iter = 0
        g_max = 0.0
        for s in range(n):
            i = order[s]
            yi = y[i]
            wx = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                wx += w[indices[p]] * data[p]
            if bias > 0.0:
                wx += w[n_feat] * bias
            ywx = yi * wx
            a = qd[i]
            ind1 = 2 * i
            ind2 = 2 * i + 1
            sign = 1.0
            if 0.5 * a * (alpha[ind2] - alpha[ind1]) + ywx < 0.0:
                ind1 = 2 * i + 1
                ind2 = 2 * i
                sign = -1.0
            alpha_old = alpha[ind1]
            z = alpha_old
            if C - z < 0.5 * C:
                z = 0.1 * z
            gp = a * (z - alpha_old) + sign * ywx + np.log(z / (C - z))
            g_max = max(g_max, abs(gp))
            inner = 0
            while inner <= _MAX_INNER:
                if abs(gp) < inner_eps:
                    break
                gpp = a + C / (C - z) / z
                tmpz = z - gp / gpp
                if tmpz <= 0.0:
                    z *= _ETA
                else:
                    z = tmpz
                gp = a * (z - alpha_old) + sign * ywx + np.log(z / (C - z))
                newton_iter += 1
                inner += 1
            if inner > 0:
                alpha[ind1] = z
                alpha[ind2] = C - z
                step = sign * (z - alpha_old) * yi
                for p in range(indptr[i], indptr[i + 1]):
                    w[indices[p]] += step * data[p]
                if bias > 0.0:
                    w[n_feat] += step * bias
        history[it] = _dual_objective(w, alpha, C)
        it += 1
        if g_max < eps:
            break
        if newton_iter <= n // 10:
            inner_eps = max(inner_eps_min, 0.1 * inner_eps)
    return it


@dataclass
class LinearModel:
    """Fitted one-vs-rest weights.

    ``coef[v]`` and ``intercept[v]`` (the weight of the bias feature) belong
    to ``classes[v]``; a binary problem stores a single vector for
    ``classes[1]``.
    """

    classes: np.ndarray
    coef: np.ndarray
    intercept: np.ndarray
    C: float = 5.0
    bias: float = 1.0
    tol: float = 0.1
    n_iter: list = field(default_factory=list)
    dual_history: list = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return self.coef.shape[1]


def _as_csr(X):
    if sp.issparse(X):
        X = X.tocsr()
    elif isinstance(X, (list, tuple)) and X and sp.issparse(X[0]):
        X = sp.vstack(X).tocsr()
    else:
        X = sp.csr_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    X = X.astype(np.float64)
    X.sort_indices()
    return X


def fit_binary(X, y_pm, C=5.0, bias=1.0, tol=0.1, max_iter=MAX_ITER, seed=0):
    """Solve one binary problem; ``y_pm`` in {-1, +1}.

    Returns ``(w, b, n_iter, dual_objective_per_pass)``.
    """
    X = _as_csr(X)
    n_extra = 1 if bias > 0 else 0
    w = np.zeros(X.shape[1] + n_extra)
    history = np.empty(max_iter)
    n_iter = _solve_dual(X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data,
                         float(bias), np.asarray(y_pm, dtype=np.float64), float(C), float(tol),
                         int(max_iter), int(seed), w, history)
    b = w[-1] if n_extra else 0.0
    return w[:X.shape[1]].copy(), float(b), int(n_iter), history[:n_iter].copy()


def train(X, y, C: float = 5.0, bias: float = 1.0, tol: float = 0.1,
          max_iter: int = MAX_ITER, seed: int = 0) -> LinearModel:
    """Fit one-vs-rest L2-regularized logistic regression.

    Raises ``ValueError`` when ``y`` holds a single class.
    """
    X = _as_csr(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("no training samples")
    if X.shape[0] != len(y):
        raise ValueError("X and y differ in length")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError(f"need at least two classes, got {classes.tolist()}")
    targets = [classes[1]] if len(classes) == 2 else list(classes)
    coefs, intercepts, iters, hist = [], [], [], []
    for cls in targets:
        y_pm = np.where(y == cls, 1.0, -1.0)
        w, b, n_it, h = fit_binary(X, y_pm, C, bias, tol, max_iter, seed)
        coefs.append(w)
        intercepts.append(b)
        iters.append(n_it)
        hist.append(h)
    return LinearModel(classes, np.vstack(coefs), np.array(intercepts), float(C), float(bias),
                       float(tol), iters, hist)


def decision_function(model: LinearModel, X) -> np.ndarray:
    """Per-class scores ``w . x~``, shape ``(n_samples, n_classes)``."""
    X = _as_csr(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    raw = np.asarray(X @ model.coef.T) + model.intercept[None, :] * model.bias
    if len(model.classes) == 2:
        return np.hstack([-raw, raw])
    return raw


def predict_scores(model: LinearModel, X):
    """Labels (argmax, first class wins ties) and score matrix."""
    scores = decision_function(model, X)
    return model.classes[np.argmax(scores, axis=1)], scores


def predict(model: LinearModel, x):
    """Label and per-class scores of a single vector."""
    labels, scores = predict_scores(model, x)
    return labels[0], scores[0]


def primal_objective(w, b, X, y_pm, C, bias):
    X = _as_csr(X)
    margins = np.asarray(y_pm) * (X @ w + b * bias)
    return 0.5 * (w @ w + b * b) + C * np.logaddexp(0.0, -margins).sum()


def primal_gradient(w, b, X, y_pm, C, bias):
    """Gradient of :func:`primal_objective` w.r.t. ``(w, b)``."""
    X = _as_csr(X)
    y_pm = np.asarray(y_pm, dtype=np.float64)
    margins = y_pm * (X @ w + b * bias)
    s = -C * y_pm * (0.5 * (1.0 - np.tanh(0.5 * margins)))
    gw = w + X.T @ s
    gb = b + bias * s.sum()
    return np.append(gw, gb)
