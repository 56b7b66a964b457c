"""Gaussian variational families, closed-form KL divergences, and
deterministic reparameterized sampling.

The target family is a full-covariance Gaussian stored through its
Cholesky factor (gradients are taken in (m, L) coordinates, so positive
definiteness never needs a projection).  The competitor family is
mean-field with log-variance coordinates; those coordinates are clamped to
a compact box during optimization, which is what keeps the concave-side
geometry of the saddle objective in force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FullGaussian",
    "MeanFieldGaussian",
    "GaussianPrior",
    "LOGVAR_BOX",
    "kl_full",
    "kl_meanfield",
    "kl_full_grads",
    "kl_meanfield_grads",
    "reparam_full",
    "reparam_meanfield",
    "lognormal_mean",
]

# compact box for mean-field log variances, enforced by the solvers
LOGVAR_BOX = (-12.0, 6.0)


@dataclass(frozen=True)
class FullGaussian:
    """N(m, L L^T) with lower-triangular L, strictly positive diagonal."""

    m: np.ndarray
    chol_L: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float).reshape(-1)
        L = np.asarray(self.chol_L, dtype=float)
        if L.shape != (m.size, m.size):
            raise ValueError("Cholesky factor shape must match the mean")
        if np.any(np.triu(L, 1) != 0.0):
            raise ValueError("Cholesky factor must be lower triangular")
        if np.any(np.diag(L) <= 0.0):
            raise ValueError("Cholesky diagonal must be strictly positive")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "chol_L", L)

    @property
    def dim(self) -> int:
        return self.m.size

    @property
    def cov(self) -> np.ndarray:
        return self.chol_L @ self.chol_L.T


@dataclass(frozen=True)
class MeanFieldGaussian:
    """N(m', diag(exp(s))) in mean / log-variance coordinates."""

    m_prime: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m_prime, dtype=float).reshape(-1)
        s = np.asarray(self.s, dtype=float).reshape(-1)
        if s.size != m.size:
            raise ValueError("log-variance vector must match the mean")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise ValueError("mean-field parameters must be finite")
        object.__setattr__(self, "m_prime", m)
        object.__setattr__(self, "s", s)

    @property
    def dim(self) -> int:
        return self.m_prime.size

    @property
    def sigma_sq(self) -> np.ndarray:
        return np.exp(self.s)


@dataclass(frozen=True)
class GaussianPrior:
    """Gaussian prior with diagonal or full positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).reshape(-1)
        c = np.asarray(self.cov, dtype=float)
        if c.ndim == 1:
            if c.size != m.size or np.any(c <= 0):
                raise ValueError("diagonal covariance must be positive with matching length")
        else:
            if c.shape != (m.size, m.size):
                raise ValueError("covariance shape must match the mean")
            try:
                np.linalg.cholesky(c)
            except np.linalg.LinAlgError as exc:
                raise ValueError("prior covariance must be positive definite") from exc
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", c)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def is_diagonal(self) -> bool:
        return self.cov.ndim == 1

    def cov_matrix(self) -> np.ndarray:
        return np.diag(self.cov) if self.is_diagonal else self.cov

    def diag_variances(self) -> np.ndarray:
        if self.is_diagonal:
            return self.cov
        d = np.diag(self.cov)
        if np.any(np.tril(self.cov, -1) != 0.0) or np.any(np.triu(self.cov, 1) != 0.0):
            raise ValueError("a diagonal prior is required here")
        return d

    @staticmethod
    def isotropic(dim: int, variance: float, mean: float = 0.0) -> "GaussianPrior":
        return GaussianPrior(mean=np.full(dim, mean), cov=np.full(dim, variance))


def kl_full(q: FullGaussian, p: GaussianPrior) -> float:
    """KL(N(m, LL^T) || prior), in closed form."""
    if q.dim != p.dim:
        raise ValueError("dimension mismatch")
    d = q.dim
    cov_p = p.cov_matrix()
    lp = np.linalg.cholesky(cov_p)
    # solve L_p Z = L  ->  tr(Sigma_p^{-1} Sigma) = ||Z||_F^2
    z = np.linalg.solve(lp, q.chol_L)
    trace_term = float((z**2).sum())
    delta = q.m - p.mean
    w = np.linalg.solve(lp, delta)
    quad = float(w @ w)
    logdet_p = 2.0 * float(np.log(np.diag(lp)).sum())
    logdet_q = 2.0 * float(np.log(np.diag(q.chol_L)).sum())
    return 0.5 * (trace_term - d + logdet_p - logdet_q + quad)


def kl_meanfield(q: MeanFieldGaussian, p: GaussianPrior) -> float:
    """KL of a mean-field Gaussian against a diagonal prior, coordinate-wise."""
    if q.dim != p.dim:
        raise ValueError("dimension mismatch")
    v = p.diag_variances()
    sig2 = q.sigma_sq
    delta = q.m_prime - p.mean
    return float(0.5 * np.sum(sig2 / v - 1.0 - q.s + np.log(v) + delta**2 / v))


def kl_full_grads(q: FullGaussian, p: GaussianPrior):
    """Exact gradients of kl_full in (m, L) coordinates."""
    cov_p = p.cov_matrix()
    prec = np.linalg.inv(cov_p)
    g_m = prec @ (q.m - p.mean)
    g_L = np.tril(prec @ q.chol_L)
    g_L[np.diag_indices(q.dim)] -= 1.0 / np.diag(q.chol_L)
    return g_m, g_L


def kl_meanfield_grads(q: MeanFieldGaussian, p: GaussianPrior):
    """Exact gradients of kl_meanfield in (m', s) coordinates."""
    v = p.diag_variances()
    g_m = (q.m_prime - p.mean) / v
    g_s = 0.5 * (q.sigma_sq / v - 1.0)
    return g_m, g_s


def reparam_full(q: FullGaussian, eps) -> np.ndarray:
    """theta = m + L eps; deterministic in (q, eps).

    Accepts a single vector or a (K, d) stack of standard-normal draws.
    """
    e = np.asarray(eps, dtype=float)
    if e.ndim == 1:
        if e.size != q.dim:
            raise ValueError("noise dimension mismatch")
        return q.m + q.chol_L @ e
    if e.shape[1] != q.dim:
        raise ValueError("noise dimension mismatch")
    return q.m[None, :] + e @ q.chol_L.T


def reparam_meanfield(q: MeanFieldGaussian, eps) -> np.ndarray:
    """theta' = m' + exp(s/2) * eps, elementwise."""
    e = np.asarray(eps, dtype=float)
    scale = np.exp(0.5 * q.s)
    if e.ndim == 1:
        if e.size != q.dim:
            raise ValueError("noise dimension mismatch")
        return q.m_prime + scale * e
    if e.shape[1] != q.dim:
        raise ValueError("noise dimension mismatch")
    return q.m_prime[None, :] + e * scale[None, :]


def lognormal_mean(m: float, s_sq: float) -> float:
    """Mean of exp(Z) for Z ~ N(m, s_sq): exp(m + s_sq / 2)."""
    if not (math.isfinite(m) and math.isfinite(s_sq)):
        raise ValueError("parameters must be finite")
    if s_sq < 0:
        raise ValueError("variance must be nonnegative")
    return math.exp(m + 0.5 * s_sq)
