"""Bounded pairwise contrasts and their empirical/population risks.

The central object is the bounded map of a density ratio,
``psi(x) = (sqrt(x) - 1) / (sqrt(x) + 1)``, evaluated on the log-ratio scale
as ``tanh(u / 4)`` for numerical stability near ratio 0 and +inf.  The
direct square-root form is retained for cross-checks.

Grid-based supremum contrasts here are for desk-scale validation in one
dimension; the production path is the variational solver in
:mod:`rho_bayes.saddle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .models import RatioCode, Sample, log_density_ratio

__all__ = [
    "ContrastEstimate",
    "psi",
    "psi_of_log_ratio",
    "pairwise_contrast",
    "empirical_contrast",
    "population_contrast_mc",
    "empirical_supremum_contrast",
]


@dataclass(frozen=True)
class ContrastEstimate:
    """A contrast aggregate in [-1, 1] with its Monte-Carlo error.

    ``std_error`` is 0 and ``n_draws`` is 0 for exact empirical means.
    """

    value: float
    std_error: float = 0.0
    n_draws: int = 0

    def __post_init__(self):
        if abs(self.value) > 1.0 + 1e-12:
            raise ValueError("contrast aggregates live in [-1, 1]")
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")


def psi(x) -> float:
    """Bounded ratio contrast (sqrt(x)-1)/(sqrt(x)+1); psi(0) = -1, psi(+inf) = 1."""
    xv = float(x)
    if math.isnan(xv) or xv < 0.0:
        raise ValueError("psi needs a nonnegative (possibly infinite) argument")
    if math.isinf(xv):
        return 1.0
    r = math.sqrt(xv)
    return (r - 1.0) / (r + 1.0)


def psi_of_log_ratio(u) -> float:
    """Same contrast on the log-ratio scale: tanh(u/4), with +-inf -> +-1."""
    uv = float(u)
    if math.isnan(uv):
        raise ValueError("log ratio must not be NaN")
    return math.tanh(uv / 4.0)


def pairwise_contrast(model, theta, theta_prime, x, i: int = 0) -> float:
    """Coordinate-wise contrast of theta' against theta at observation x.

    Zero-density sentinels map to the ratio conventions: 0/0 -> 0,
    vanishing numerator -> -1, vanishing denominator -> +1.
    """
    u, code = log_density_ratio(model, theta, theta_prime, x, i)
    if code is RatioCode.BOTH_ZERO:
        return 0.0
    if code is RatioCode.NUM_ZERO:
        return -1.0
    if code is RatioCode.DEN_ZERO:
        return 1.0
    return psi_of_log_ratio(u)


def contrast_matrix(model, params_a: np.ndarray, params_b: np.ndarray, sample: Sample) -> np.ndarray:
    """Contrast of every (theta_k, theta'_k) pair at every observation.

    ``params_a`` and ``params_b`` are (K, d) stacks; the result is (K, n).
    Vectorized core shared by the Monte-Carlo risk estimators and the
    saddle solver.
    """
    la = model.log_density_matrix(params_a, sample)
    lb = model.log_density_matrix(params_b, sample)
    with np.errstate(invalid="ignore"):
        u = lb - la
    # copysign keeps swap-antisymmetry bitwise exact
    out = np.copysign(np.tanh(np.abs(u) / 4.0), u)
    # -inf - -inf = nan marks the both-zero convention psi(1) = 0
    return np.where(np.isnan(u), 0.0, out)


def empirical_contrast(model, theta, theta_prime, sample: Sample) -> ContrastEstimate:
    """Sample-averaged contrast (1/n) sum_i l(X_i; theta, theta')."""
    if sample.n < 1:
        raise ValueError("sample must be nonempty")
    a = np.asarray(theta, dtype=float).reshape(1, -1)
    b = np.asarray(theta_prime, dtype=float).reshape(1, -1)
    vals = contrast_matrix(model, a, b, sample)
    return ContrastEstimate(value=float(vals.mean()), std_error=0.0, n_draws=0)


def population_contrast_mc(model, theta, theta_prime, data_law, n_draws: int, seed: int) -> ContrastEstimate:
    """Monte-Carlo population contrast under an arbitrary data law.

    ``data_law(rng, size)`` draws observations.  The estimate is the mean
    contrast over ``n_draws`` draws with the unbiased-variance standard
    error; identical seeds yield identical draws, so swapping the two
    parameters negates the estimate exactly.
    """
    if n_draws < 2:
        raise ValueError("need at least 2 draws")
    rng = _rng.generator(seed, 0)
    x = np.asarray(data_law(rng, n_draws), dtype=float)
    if x.shape != (n_draws,) or not np.all(np.isfinite(x)):
        raise ValueError("data law must return n_draws finite scalars")
    a = np.asarray(theta, dtype=float).reshape(1, -1)
    b = np.asarray(theta_prime, dtype=float).reshape(1, -1)
    vals = contrast_matrix(model, a, b, Sample(x))[0]
    se = float(vals.std(ddof=1) / math.sqrt(n_draws))
    return ContrastEstimate(value=float(vals.mean()), std_error=se, n_draws=n_draws)


def empirical_supremum_contrast(model, theta, sample: Sample, grid):
    """Max over a competitor grid of the empirical contrast, with argmax.

    Ties break to the lowest grid index.  Refining the grid can only
    increase the value.
    """
    grid_arr = [np.asarray(g, dtype=float).reshape(1, -1) for g in grid]
    if len(grid_arr) == 0:
        raise ValueError("competitor grid must be nonempty")
    b = np.vstack(grid_arr)
    a = np.asarray(theta, dtype=float).reshape(1, -1)
    la = model.log_density_matrix(a, sample)
    lb = model.log_density_matrix(b, sample)
    with np.errstate(invalid="ignore"):
        u = lb - la
    vals = np.where(np.isnan(u), 0.0, np.copysign(np.tanh(np.abs(u) / 4.0), u)).mean(axis=1)
    j = int(np.argmax(vals))
    return float(vals[j]), grid[j]
