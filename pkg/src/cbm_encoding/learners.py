"""Deterministic linear meta-learners: logistic, multinomial logistic, ridge.

Logistic and multinomial models minimize the mean negative log-likelihood
plus ``l2 / 2 * ||W||^2`` (intercepts unpenalized) by full-batch gradient
descent with Armijo backtracking. Ridge solves the normal equations on
centred data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit, logsumexp, softmax

from .types import BINARY, MULTICLASS, REGRESSION, TaskKind

ARMIJO_C = 1e-4


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray          # (D,) or (D, K)
    intercept: np.ndarray        # (1,) or (K,)
    task: TaskKind
    l2: float
    n_iter: int = 0
    objective: float = float("nan")

    def decision_function(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) @ self.weights + self.intercept

    def predict_proba(self, Z) -> np.ndarray:
        """P(y=1) for binary models, the (N, K) class probabilities for multinomial."""
        if self.task.kind == BINARY:
            return expit(self.decision_function(Z))
        if self.task.kind == MULTICLASS:
            return softmax(self.decision_function(Z), axis=1)
        raise TypeError("regression models have no class probabilities")

    def predict(self, Z) -> np.ndarray:
        if self.task.kind == BINARY:
            return (self.decision_function(Z) > 0).astype(np.int64)
        if self.task.kind == MULTICLASS:
            return np.argmax(self.decision_function(Z), axis=1)
        return self.decision_function(Z)


def _check(Z, y):
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y)
    if Z.ndim != 2 or Z.shape[0] != y.shape[0]:
        raise ValueError(f"Z {Z.shape} and y {y.shape} do not align")
    if Z.shape[0] == 0:
        raise ValueError("no training rows")
    if not (np.isfinite(Z).all() and np.isfinite(y).all()):
        raise ValueError("non-finite training input")
    return Z, y


def logistic_objective(w, b, Z, y, l2):
    """Objective value and gradients ``(f, grad_w, grad_b)`` of binary logistic regression."""
    z = Z @ w + b
    f = np.mean(-log_expit(z) + (1 - y) * z) + 0.5 * l2 * (w @ w)
    r = (expit(z) - y) / len(y)
    return f, Z.T @ r + l2 * w, np.array([r.sum()])


def multinomial_objective(W, b, Z, Y, l2):
    """Objective and gradients for softmax regression; ``Y`` is one-hot (N, K)."""
    z = Z @ W + b
    lse = logsumexp(z, axis=1)
    f = np.mean(lse - (z * Y).sum(axis=1)) + 0.5 * l2 * np.sum(W * W)
    R = (np.exp(z - lse[:, None]) - Y) / len(Y)
    return f, Z.T @ R + l2 * W, R.sum(axis=0)


def _descend(Z, w, b, loss_from_logits, grad_from_logits, l2, max_iter, tol):
    """Gradient descent with backtracking on logits ``Z @ w + b``.

    Each iteration costs one ``Z @`` and one ``Z.T @`` product: the trial
    logits along the descent direction are affine in the step size.
    """
    z = Z @ w + b
    f = loss_from_logits(z) + 0.5 * l2 * np.sum(w * w)
    step, it = 1.0, 0
    for it in range(1, max_iter + 1):
        r = grad_from_logits(z)
        gw = Z.T @ r + l2 * w
        gb = r.sum(axis=0)
        gnorm = max(np.abs(gw).max(initial=0.0), np.abs(gb).max(initial=0.0))
        if gnorm < tol:
            return w, b, f, it - 1
        g2 = np.sum(gw * gw) + np.sum(gb * gb)
        dz = Z @ gw + gb
        step *= 2.0
        while True:
            w_new = w - step * gw
            z_new = z - step * dz
            f_new = loss_from_logits(z_new) + 0.5 * l2 * np.sum(w_new * w_new)
            if f_new <= f - ARMIJO_C * step * g2 or step < 1e-16:
                break
            step *= 0.5
        w, b, z, f = w_new, b - step * gb, z_new, f_new
    return w, b, f, it


def fit_logistic(Z, y, l2: float = 1e-3, max_iter: int = 1000, tol: float = 1e-6) -> LinearModel:
    """Binary logistic regression; stops once the gradient's max-norm drops below ``tol``."""
    Z, y = _check(Z, y)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("logistic regression needs 0/1 targets")
    y = y.astype(np.float64)
    n = len(y)

    def loss(z):
        return np.mean(-log_expit(z) + (1 - y) * z)

    def grad(z):
        return (expit(z) - y) / n

    w, b, f, it = _descend(Z, np.zeros(Z.shape[1]), np.zeros(1), loss, grad, l2, max_iter, tol)
    return LinearModel(w, b, TaskKind.binary(), l2, it, float(f))


def fit_multinomial(Z, y, n_classes: int, l2: float = 1e-3, max_iter: int = 1000,
                    tol: float = 1e-6) -> LinearModel:
    """Softmax regression with one weight column and intercept per class."""
    Z, y = _check(Z, y)
    y = y.astype(np.int64)
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"class ids must lie in 0..{n_classes - 1}")
    Y = np.eye(n_classes)[y]
    n = len(y)

    def loss(z):
        return np.mean(logsumexp(z, axis=1) - (z * Y).sum(axis=1))

    def grad(z):
        return (softmax(z, axis=1) - Y) / n

    W0 = np.zeros((Z.shape[1], n_classes))
    W, b, f, it = _descend(Z, W0, np.zeros(n_classes), loss, grad, l2, max_iter, tol)
    return LinearModel(W, b, TaskKind.multiclass(n_classes), l2, it, float(f))


def fit_ridge(Z, y, l2: float = 1.0) -> LinearModel:
    """Solve ``(Zc'Zc + l2 I) w = Zc'yc`` on centred data; intercept restores the means."""
    if l2 <= 0:
        raise ValueError("ridge needs l2 > 0")
    Z, y = _check(Z, y)
    y = y.astype(np.float64)
    zm, ym = Z.mean(axis=0), y.mean()
    Zc = Z - zm
    w = np.linalg.solve(Zc.T @ Zc + l2 * np.eye(Z.shape[1]), Zc.T @ (y - ym))
    resid = Zc @ w - (y - ym)
    obj = 0.5 * (resid @ resid) + 0.5 * l2 * (w @ w)
    return LinearModel(w, np.array([ym - zm @ w]), TaskKind.regression(), l2, 1, float(obj))


def fit_for_task(task: TaskKind, Z, y, l2: float, max_iter: int = 1000,
                 tol: float = 1e-6) -> LinearModel:
    if task.kind == BINARY:
        return fit_logistic(Z, y, l2, max_iter, tol)
    if task.kind == MULTICLASS:
        return fit_multinomial(Z, y, task.n_classes, l2, max_iter, tol)
    if task.kind == REGRESSION:
        return fit_ridge(Z, y, l2)
    raise ValueError(task)
