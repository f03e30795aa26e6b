"""Closed-form conjugate models: prior initialization, posterior update, moments.

Three families are covered:

* Beta prior with Binomial likelihood (binary targets),
* Dirichlet prior with Multinomial likelihood (multiclass targets),
* Normal-Inverse-Gamma prior with Gaussian likelihood (real targets).

Updates are written with plain arithmetic so they also work on exact
``fractions.Fraction`` parameters; evidence counts are always Python ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyTargetError, UndefinedMomentError
from .types import check_q

PRIOR_EPS = 1e-3
VAR_EPS = 1e-9
NIG_NU0 = 1.0
NIG_ALPHA0 = 3.0


def _positive_finite(name, value):
    if not (value > 0 and np.isfinite(float(value))):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        _positive_finite("alpha", self.alpha)
        _positive_finite("beta", self.beta)

    def to_list(self) -> list[float]:
        return [float(self.alpha), float(self.beta)]


@dataclass(frozen=True)
class DirichletParams:
    alpha: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        if len(self.alpha) < 2:
            raise ValueError("Dirichlet needs at least two classes")
        for a in self.alpha:
            _positive_finite("alpha_k", a)

    @property
    def n_classes(self) -> int:
        return len(self.alpha)

    def to_list(self) -> list[float]:
        return [float(a) for a in self.alpha]


@dataclass(frozen=True)
class NIGParams:
    """Normal-Inverse-Gamma over (mean m, variance s2): s2 ~ IG(alpha, beta), m | s2 ~ N(mu, s2/nu)."""

    mu: float
    nu: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not np.isfinite(float(self.mu)):
            raise ValueError("mu must be finite")
        _positive_finite("nu", self.nu)
        _positive_finite("alpha", self.alpha)
        _positive_finite("beta", self.beta)

    def to_list(self) -> list[float]:
        return [float(self.mu), float(self.nu), float(self.alpha), float(self.beta)]


def _nonempty(y) -> np.ndarray:
    y = np.asarray(y)
    if y.size == 0:
        raise EmptyTargetError("cannot initialize a prior from an empty target")
    return y


def _clamp(x, lo, hi):
    return min(max(x, lo), hi)


# Beta-Binomial

def beta_prior_from_target(y) -> BetaParams:
    """Prior centred on the training positive rate, with total strength one.

    Degenerate rates are clamped into ``[PRIOR_EPS, 1 - PRIOR_EPS]``.
    """
    y = _nonempty(y)
    rate = float(np.mean(y))
    return BetaParams(_clamp(rate, PRIOR_EPS, 1 - PRIOR_EPS),
                      _clamp(1.0 - rate, PRIOR_EPS, 1 - PRIOR_EPS))


def beta_update(prior: BetaParams, y_subset) -> BetaParams:
    y = np.asarray(y_subset)
    n = int(y.size)
    s = int(np.sum(y, dtype=np.int64)) if n else 0
    return BetaParams(prior.alpha + s, prior.beta + n - s)


def beta_moments(p: BetaParams, q: int) -> np.ndarray:
    q = check_q(q)
    a, b = p.alpha, p.beta
    total = a + b
    out = [a / total]
    if q == 2:
        out.append(a * b / (total * total * (total + 1)))
    return np.array(out, dtype=np.float64)


# Dirichlet-Multinomial

def dirichlet_prior_from_target(y, n_classes: int) -> DirichletParams:
    """Normalized class frequencies; unseen classes get ``PRIOR_EPS`` before normalizing."""
    y = _nonempty(y).astype(np.int64)
    counts = np.bincount(y, minlength=n_classes)
    if counts.size > n_classes:
        raise ValueError(f"class id {y.max()} out of range for {n_classes} classes")
    clamped = [max(float(c), PRIOR_EPS) for c in counts]
    z = sum(clamped)
    return DirichletParams(tuple(c / z for c in clamped))


def dirichlet_update(prior: DirichletParams, y_subset) -> DirichletParams:
    y = np.asarray(y_subset, dtype=np.int64)
    k = prior.n_classes
    counts = np.bincount(y, minlength=k) if y.size else np.zeros(k, dtype=np.int64)
    if counts.size > k:
        raise ValueError(f"class id {y.max()} out of range for {k} classes")
    return DirichletParams(tuple(a + int(c) for a, c in zip(prior.alpha, counts)))


def dirichlet_moments(p: DirichletParams, q: int) -> np.ndarray:
    """All K means, then (for q=2) all K marginal variances."""
    q = check_q(q)
    a0 = sum(p.alpha)
    out = [a / a0 for a in p.alpha]
    if q == 2:
        out += [a * (a0 - a) / (a0 * a0 * (a0 + 1)) for a in p.alpha]
    return np.array(out, dtype=np.float64)


# Normal-Inverse-Gamma / Gaussian

def _mean_popvar(y: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(y))
    return mean, float(np.mean((y - mean) ** 2))


def nig_prior_from_target(y) -> NIGParams:
    """Location from the sample mean, scale from the population variance.

    Pseudo-count ``nu=1`` and shape ``alpha=3`` keep every reported moment finite.
    """
    y = _nonempty(y).astype(np.float64)
    mean, var = _mean_popvar(y)
    return NIGParams(mean, NIG_NU0, NIG_ALPHA0, max(var, VAR_EPS))


def nig_update(prior: NIGParams, y_subset) -> NIGParams:
    y = np.asarray(y_subset, dtype=np.float64)
    n = y.size
    if n == 0:
        return prior
    xbar, var = _mean_popvar(y)
    mu, nu, alpha, beta = prior.mu, prior.nu, prior.alpha, prior.beta
    return NIGParams(
        mu=(nu * mu + n * xbar) / (nu + n),
        nu=nu + n,
        alpha=alpha + n / 2,
        beta=beta + 0.5 * n * var + (n * nu / (nu + n)) * ((xbar - mu) ** 2 / 2),
    )


def nig_moments(p: NIGParams, q: int) -> np.ndarray:
    """``[E[m], E[s2]]`` for q=1; q=2 appends ``[Var[m], Var[s2]]``."""
    q = check_q(q)
    a, b = p.alpha, p.beta
    if a <= q:
        raise UndefinedMomentError(f"NIG moments up to order {q} need alpha > {q}, got {a}")
    out = [p.mu, b / (a - 1)]
    if q == 2:
        out += [b / (p.nu * (a - 1)), b * b / ((a - 1) ** 2 * (a - 2))]
    return np.array(out, dtype=np.float64)


# Dispatch by task kind, used by the encoder.

def prior_from_target(task, y):
    if task.kind == "binary":
        return beta_prior_from_target(y)
    if task.kind == "multiclass":
        return dirichlet_prior_from_target(y, task.n_classes)
    return nig_prior_from_target(y)


def update(prior, y_subset):
    if isinstance(prior, BetaParams):
        return beta_update(prior, y_subset)
    if isinstance(prior, DirichletParams):
        return dirichlet_update(prior, y_subset)
    return nig_update(prior, y_subset)


def moments(params, q: int) -> np.ndarray:
    if isinstance(params, BetaParams):
        return beta_moments(params, q)
    if isinstance(params, DirichletParams):
        return dirichlet_moments(params, q)
    return nig_moments(params, q)


def params_from_list(task, values: Sequence[float]):
    if task.kind == "binary":
        return BetaParams(*values)
    if task.kind == "multiclass":
        return DirichletParams(tuple(values))
    return NIGParams(*values)


def family_matches(task, params) -> bool:
    expected = {"binary": BetaParams, "multiclass": DirichletParams,
                "regression": NIGParams}[task.kind]
    if not isinstance(params, expected):
        return False
    return task.kind != "multiclass" or params.n_classes == task.n_classes
