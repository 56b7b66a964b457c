"""Parametric families with explicit zero-density conventions.

Each model exposes per-coordinate log densities.  Scale-type parameters are
kept on the log scale internally (``eta = log lam`` for the Poisson
intensity, ``u = log theta`` for the uniform scale) so that the variational
machinery only ever sees unconstrained real vectors.

Zero densities are reported through explicit sentinel codes
(:class:`RatioCode`) rather than raw infinities, so the bounded contrast can
apply the ``0/0 = 1`` ratio convention unambiguously.

All operations are pure functions of immutable inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Sample",
    "RatioCode",
    "GaussianLocationModel",
    "PoissonIntensityModel",
    "UniformScaleModel",
    "CanonicalExpFamModel",
    "FixedDesignRegressionModel",
    "gaussian_location_expfam",
    "poisson_natural_expfam",
    "log_density",
    "log_density_ratio",
    "expfam_stats",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Sample:
    """Observed sample: scalar draws for i.i.d. models, one response per
    design row for fixed-design regression."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("sample must hold at least one scalar observation")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


class RatioCode(enum.Enum):
    """Outcome of a density ratio p_b / p_a at one observation."""

    NONE = 0        # both densities positive
    BOTH_ZERO = 1   # 0/0 -> ratio 1 -> log ratio 0
    NUM_ZERO = 2    # 0/positive -> ratio 0 -> log ratio -inf
    DEN_ZERO = 3    # positive/0 -> ratio +inf -> log ratio +inf


def _check_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(np.asarray(a, dtype=float))):
            raise ValueError("invalid input")


def _as_param_matrix(params, dim: int) -> np.ndarray:
    p = np.atleast_2d(np.asarray(params, dtype=float))
    if p.shape[1] != dim:
        raise ValueError(f"parameter dimension mismatch: expected {dim}, got {p.shape[1]}")
    _check_finite(p)
    return p


@dataclass(frozen=True)
class GaussianLocationModel:
    """N(theta, 1) location family."""

    kind = "gaussian_location"
    param_dim = 1
    pathwise_ok = True

    def log_density_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, 1)
        x = sample.values
        return -0.5 * _LOG_2PI - 0.5 * (x[None, :] - p[:, :1]) ** 2

    def score_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, 1)
        x = sample.values
        return (x[None, :] - p[:, :1])[:, :, None]

    def sample_data(self, param, n: int, rng: np.random.Generator) -> np.ndarray:
        theta = float(np.asarray(param).reshape(-1)[0])
        return theta + rng.standard_normal(n)


@dataclass(frozen=True)
class PoissonIntensityModel:
    """Poisson family in its natural parameter eta = log lam.

    Observations are counts; any non-integer or negative value carries zero
    mass and maps to log density -inf.
    """

    kind = "poisson_intensity"
    param_dim = 1
    pathwise_ok = True

    def log_density_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, 1)
        x = sample.values
        valid = (x >= 0) & (x == np.round(x))
        xs = np.where(valid, x, 0.0)
        out = xs[None, :] * p[:, :1] - np.exp(p[:, :1]) - gammaln(xs + 1.0)[None, :]
        out = np.where(valid[None, :], out, -np.inf)
        return out

    def score_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, 1)
        x = sample.values
        return (x[None, :] - np.exp(p[:, :1]))[:, :, None]

    def sample_data(self, param, n: int, rng: np.random.Generator) -> np.ndarray:
        eta = float(np.asarray(param).reshape(-1)[0])
        return rng.poisson(math.exp(eta), n).astype(float)


@dataclass(frozen=True)
class UniformScaleModel:
    """Uniform(0, theta) scale family in u = log theta.

    The support moves with the parameter, so pathwise gradients through the
    indicator are invalid; solvers must use the score-function route
    (``pathwise_ok`` is False).
    """

    kind = "uniform_scale"
    param_dim = 1
    pathwise_ok = False

    def log_density_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, 1)
        x = sample.values
        inside = (x[None, :] >= 0.0) & (x[None, :] <= np.exp(p[:, :1]))
        return np.where(inside, -p[:, :1], -np.inf)

    def sample_data(self, param, n: int, rng: np.random.Generator) -> np.ndarray:
        u = float(np.asarray(param).reshape(-1)[0])
        return rng.uniform(0.0, math.exp(u), n)


@dataclass(frozen=True)
class CanonicalExpFamModel:
    """Canonical exponential family h(x) exp(<theta, T(x)> - A(theta)).

    ``log_partition`` and its first two derivatives are supplied as
    callables; ``in_domain`` guards the natural-parameter domain.
    """

    kind = "canonical_expfam"
    pathwise_ok = True

    sufficient_stat: Callable[[np.ndarray], np.ndarray]
    log_partition: Callable[[np.ndarray], float]
    log_partition_grad: Callable[[np.ndarray], np.ndarray]
    log_partition_hess: Callable[[np.ndarray], np.ndarray]
    dim: int = 1
    log_base: Callable[[np.ndarray], np.ndarray] = field(default=lambda x: np.zeros_like(x))
    in_domain: Callable[[np.ndarray], bool] = field(default=lambda theta: True)

    @property
    def param_dim(self) -> int:
        return self.dim

    def log_density_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, self.dim)
        x = sample.values
        t = np.atleast_2d(np.asarray(self.sufficient_stat(x), dtype=float))
        if t.shape[0] == 1 and self.dim == 1:
            t = t.reshape(1, -1)
        a = np.array([self.log_partition(row) for row in p])
        base = np.asarray(self.log_base(x), dtype=float)
        return p @ t + base[None, :] - a[:, None]


def gaussian_location_expfam() -> CanonicalExpFamModel:
    """N(theta,1) written canonically: T(x)=x, A(theta)=theta^2/2."""
    return CanonicalExpFamModel(
        sufficient_stat=lambda x: np.asarray(x, dtype=float)[None, :],
        log_partition=lambda th: 0.5 * float(th[0]) ** 2,
        log_partition_grad=lambda th: np.array([float(th[0])]),
        log_partition_hess=lambda th: np.array([[1.0]]),
        log_base=lambda x: -0.5 * _LOG_2PI - 0.5 * np.asarray(x, dtype=float) ** 2,
    )


def poisson_natural_expfam() -> CanonicalExpFamModel:
    """Poisson in natural form: T(x)=x, A(eta)=exp(eta)."""
    return CanonicalExpFamModel(
        sufficient_stat=lambda x: np.asarray(x, dtype=float)[None, :],
        log_partition=lambda th: float(np.exp(th[0])),
        log_partition_grad=lambda th: np.exp(np.asarray(th[:1], dtype=float)),
        log_partition_hess=lambda th: np.exp(np.asarray(th[:1], dtype=float))[:, None],
        log_base=lambda x: -gammaln(np.asarray(x, dtype=float) + 1.0),
    )


@dataclass(frozen=True)
class FixedDesignRegressionModel:
    """Fixed-design regression: coordinate i observes y_i with candidate
    noise density q around the linear predictor (design @ beta)_i.

    The candidate noise defaults to the standard Gaussian; a custom pair
    (log pdf, d/dz log pdf) may be supplied for other noise shapes.
    """

    kind = "fixed_design_regression"
    pathwise_ok = True

    design: np.ndarray
    noise_logpdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    noise_dlogpdf: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        d = np.asarray(self.design, dtype=float)
        if d.ndim != 2:
            raise ValueError("design must be a 2-d matrix")
        _check_finite(d)
        object.__setattr__(self, "design", d)

    @property
    def param_dim(self) -> int:
        return self.design.shape[1]

    @property
    def n_rows(self) -> int:
        return self.design.shape[0]

    def _logq(self, z: np.ndarray) -> np.ndarray:
        if self.noise_logpdf is None:
            return -0.5 * _LOG_2PI - 0.5 * z**2
        return self.noise_logpdf(z)

    def _dlogq(self, z: np.ndarray) -> np.ndarray:
        if self.noise_logpdf is None:
            return -z
        if self.noise_dlogpdf is None:
            raise ValueError("custom noise requires noise_dlogpdf for score computations")
        return self.noise_dlogpdf(z)

    def log_density_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, self.param_dim)
        if sample.n != self.n_rows:
            raise ValueError("regression sample must carry one response per design row")
        preds = p @ self.design.T
        return self._logq(sample.values[None, :] - preds)

    def score_matrix(self, params, sample: Sample) -> np.ndarray:
        p = _as_param_matrix(params, self.param_dim)
        if sample.n != self.n_rows:
            raise ValueError("regression sample must carry one response per design row")
        z = sample.values[None, :] - p @ self.design.T
        # d/dbeta log q(y - X beta) = -dlogq(z) * X_i
        return -self._dlogq(z)[:, :, None] * self.design[None, :, :]

    def sample_data(self, param, n: int, rng: np.random.Generator) -> np.ndarray:
        if n != self.n_rows:
            raise ValueError("n must equal the number of design rows")
        beta = np.asarray(param, dtype=float).reshape(-1)
        return self.design @ beta + rng.standard_normal(n)


def log_density(model, param, x, i: int = 0) -> float:
    """Log density of coordinate ``i`` at observation ``x``; -inf exactly
    when the density vanishes there."""
    xv = np.asarray(x, dtype=float)
    _check_finite(xv, np.asarray(param, dtype=float))
    if model.kind == "fixed_design_regression":
        if not 0 <= i < model.n_rows:
            raise ValueError("coordinate index outside the design")
        beta = np.asarray(param, dtype=float).reshape(-1)
        pred = float(model.design[i] @ beta)
        return float(model._logq(np.asarray(float(xv) - pred)))
    if model.kind == "canonical_expfam" and not model.in_domain(np.asarray(param, dtype=float).reshape(-1)):
        raise ValueError("parameter outside the natural-parameter domain")
    sample = Sample(np.array([float(xv)]))
    return float(model.log_density_matrix(np.asarray(param, dtype=float).reshape(1, -1), sample)[0, 0])


def log_density_ratio(model, theta, theta_prime, x, i: int = 0):
    """Log of p_{theta'}(x) / p_theta(x) with its sentinel code.

    Returns ``(u, code)`` where ``u`` may be +-inf; the conventions are
    0/0 -> (0, BOTH_ZERO), 0/pos -> (-inf, NUM_ZERO), pos/0 -> (+inf, DEN_ZERO).
    """
    la = log_density(model, theta, x, i)
    lb = log_density(model, theta_prime, x, i)
    a_zero = la == -np.inf
    b_zero = lb == -np.inf
    if a_zero and b_zero:
        return 0.0, RatioCode.BOTH_ZERO
    if b_zero:
        return -np.inf, RatioCode.NUM_ZERO
    if a_zero:
        return np.inf, RatioCode.DEN_ZERO
    return float(lb - la), RatioCode.NONE


def expfam_stats(model: CanonicalExpFamModel, theta):
    """Mean map and Fisher information of a canonical exponential family."""
    th = np.asarray(theta, dtype=float).reshape(-1)
    _check_finite(th)
    if not model.in_domain(th):
        raise ValueError("parameter outside the natural-parameter domain")
    mean = np.asarray(model.log_partition_grad(th), dtype=float).reshape(-1)
    fisher = np.atleast_2d(np.asarray(model.log_partition_hess(th), dtype=float))
    sym_gap = np.max(np.abs(fisher - fisher.T)) if fisher.size else 0.0
    if sym_gap > 1e-8:
        raise ValueError("Fisher information must be symmetric")
    eigs = np.linalg.eigvalsh(0.5 * (fisher + fisher.T))
    if eigs.min() < -1e-10:
        raise ValueError("Fisher information must be positive semidefinite")
    return mean, fisher
