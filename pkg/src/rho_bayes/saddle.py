"""Primal-dual objective for the tempered pairwise-contrast posterior and
its stochastic solvers.

The objective couples a full-covariance Gaussian target (parameters
``phi = (m, L)``) against a mean-field Gaussian competitor
(``nu = (m', s)``):

    L(phi, nu) = E_phi E_nu [ mean contrast ] + KL(phi || prior)/lam
                                              - KL(nu || prior')/lam

The target descends, the competitor ascends.  Monte-Carlo estimates pair
``K`` target draws with ``K'`` competitor draws one-to-one (draws recycle
cyclically when the counts differ), which at equal cost beats the full
cross-product on variance.  All draws are derived from explicit seeds, so
every estimate is reproducible and common-random-number comparisons across
parameter values are exact.

Gradients are pathwise (reparameterized) for families whose coordinate
log densities are differentiable with fixed support.  Families with
parameter-dependent support (the uniform scale model) get score-function
gradients with a mean baseline instead: the pathwise estimator silently
drops the support boundary terms there and drives the optimizer off a
cliff.

Mean-field log variances are clamped to ``LOGVAR_BOX`` and target Cholesky
diagonals to the matching scale box after every update; competitor means
are boxed at 1e3 for regression-sized problems.  The concave-side geometry
of the objective is only guaranteed on a compact region, and the clamps
are what keep iterates inside one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _rng
from .contrast import contrast_matrix
from .models import Sample
from .variational import (
    LOGVAR_BOX,
    FullGaussian,
    GaussianPrior,
    MeanFieldGaussian,
    kl_full,
    kl_full_grads,
    kl_meanfield,
    kl_meanfield_grads,
    reparam_full,
    reparam_meanfield,
)

__all__ = [
    "SaddleProblem",
    "McConfig",
    "SaddleGrads",
    "SaddleState",
    "AdamHyper",
    "OptimizerConfig",
    "FitResult",
    "SaddleDivergence",
    "initial_state",
    "objective_given_eps",
    "objective_mc",
    "grad_mc",
    "adam_step",
    "extragradient_update",
    "extragradient_step",
    "fit_rho_posterior",
    "variational_softmax",
    "logmeanexp_softmax",
    "nu_hessian_fd",
    "grad_lipschitz_estimate",
]

MPRIME_BOX = 1e3  # competitor means stay inside a compact box
_CHOL_DIAG_BOX = (math.exp(LOGVAR_BOX[0] / 2.0), math.exp(LOGVAR_BOX[1] / 2.0))


class SaddleDivergence(RuntimeError):
    """Raised when an iterate or gradient goes non-finite; carries the last
    valid state."""

    def __init__(self, message: str, last_state: "SaddleState"):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class SaddleProblem:
    model: object
    sample: Sample
    prior_target: GaussianPrior
    prior_competitor: GaussianPrior
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("temperature must be positive")
        d = self.model.param_dim
        if self.prior_target.dim != d or self.prior_competitor.dim != d:
            raise ValueError("prior dimension must match the model parameter dimension")
        if self.sample.n < 1:
            raise ValueError("sample must be nonempty")


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo budget for one objective/gradient evaluation.

    With ``common_random_numbers`` the gradient call replays exactly the
    draws of the objective call at the same seed, making finite-difference
    checks and across-parameter comparisons noise-free.
    """

    n_theta_draws: int = 64
    n_theta_prime_draws: int = 64
    seed: int = 0
    common_random_numbers: bool = True

    def __post_init__(self):
        if self.n_theta_draws < 1 or self.n_theta_prime_draws < 1:
            raise ValueError("draw counts must be at least 1")


@dataclass(frozen=True)
class SaddleGrads:
    m: np.ndarray
    chol_L: np.ndarray
    m_prime: np.ndarray
    s: np.ndarray

    def block_norms(self):
        return {
            "m": float(np.linalg.norm(self.m)),
            "chol_L": float(np.linalg.norm(self.chol_L)),
            "m_prime": float(np.linalg.norm(self.m_prime)),
            "s": float(np.linalg.norm(self.s)),
        }


@dataclass(frozen=True)
class SaddleState:
    phi: FullGaussian
    nu: MeanFieldGaussian
    step: int = 0
    adam_m1: Optional[np.ndarray] = None  # first moments, packed layout
    adam_m2: Optional[np.ndarray] = None
    trace: tuple = ()


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    """Solver settings; mc.seed is the master seed of the whole fit.

    ``nu_update`` picks the competitor-ascent rule for the alternating
    method.  The default is a plain (unnormalized) gradient step: Adam's
    per-coordinate normalization turns the almost-flat competitor
    log-variance coordinate into a full-speed drift, collapsing the
    competitor onto a point mass.  A collapsed competitor no longer
    saturates the bounded contrast at outliers, and the target then chases
    the contaminated sample mean.  Plain ascent moves each competitor
    coordinate proportionally to its true gradient, which keeps the
    iterate in the regime where the fit is robust; ``nu_update='adam'``
    restores symmetric Adam for both blocks.
    """

    method: str = "adam"  # adam | extragradient
    n_iters: int = 200
    adam: AdamHyper = field(default_factory=AdamHyper)
    mc: McConfig = field(default_factory=McConfig)
    nu_update: str = "sgd"  # sgd | adam (alternating method only)
    nu_lr_mean: float = 0.5  # plain-ascent rate for competitor means
    nu_lr_logvar: float = 0.05  # plain-ascent rate for competitor log variances
    eg_stepsize: Optional[float] = None  # None -> probe 1/L_hat
    avg_tail: float = 0.25  # >0: report tail-averaged parameters

    def __post_init__(self):
        if self.method not in ("adam", "extragradient"):
            raise ValueError("method must be adam or extragradient")
        if self.nu_update not in ("sgd", "adam"):
            raise ValueError("nu_update must be sgd or adam")
        if self.n_iters < 1:
            raise ValueError("need at least one iteration")
        if not 0.0 <= self.avg_tail < 1.0:
            raise ValueError("avg_tail is a fraction of iterations")


@dataclass(frozen=True)
class FitResult:
    phi: FullGaussian
    nu: MeanFieldGaussian
    trace: tuple
    state: SaddleState


# ---------------------------------------------------------------------------
# packing: [m | L row-major | m' | s] with descent/ascent handled by a sign
# ---------------------------------------------------------------------------


def _pack(phi: FullGaussian, nu: MeanFieldGaussian) -> np.ndarray:
    return np.concatenate([phi.m, phi.chol_L.ravel(), nu.m_prime, nu.s])


def _unpack(x: np.ndarray, d: int):
    m = x[:d]
    L = x[d : d + d * d].reshape(d, d)
    mp = x[d + d * d : 2 * d + d * d]
    s = x[2 * d + d * d :]
    return FullGaussian(m=m.copy(), chol_L=np.tril(L).copy()), MeanFieldGaussian(m_prime=mp.copy(), s=s.copy())


def _pack_grads(g: SaddleGrads) -> np.ndarray:
    return np.concatenate([g.m, g.chol_L.ravel(), g.m_prime, g.s])


def _sign_vector(d: int) -> np.ndarray:
    s = np.ones(2 * d + d * d + d)
    s[d + d * d :] = -1.0  # ascent on the competitor blocks
    return s


def _project(x: np.ndarray, d: int) -> np.ndarray:
    y = x.copy()
    L = y[d : d + d * d].reshape(d, d)
    L[:] = np.tril(L)
    idx = np.diag_indices(d)
    L[idx] = np.clip(L[idx], _CHOL_DIAG_BOX[0], _CHOL_DIAG_BOX[1])
    y[d + d * d : 2 * d + d * d] = np.clip(y[d + d * d : 2 * d + d * d], -MPRIME_BOX, MPRIME_BOX)
    y[2 * d + d * d :] = np.clip(y[2 * d + d * d :], LOGVAR_BOX[0], LOGVAR_BOX[1])
    return y


def initial_state(prob: SaddleProblem) -> SaddleState:
    """Start both blocks at their priors: every KL term is zero at step 0."""
    phi = FullGaussian(m=prob.prior_target.mean.copy(), chol_L=np.linalg.cholesky(prob.prior_target.cov_matrix()))
    nu = MeanFieldGaussian(
        m_prime=prob.prior_competitor.mean.copy(),
        s=np.log(prob.prior_competitor.diag_variances()),
    )
    n = _pack(phi, nu).size
    return SaddleState(phi=phi, nu=nu, step=0, adam_m1=np.zeros(n), adam_m2=np.zeros(n), trace=())


# ---------------------------------------------------------------------------
# Monte-Carlo objective and gradients
# ---------------------------------------------------------------------------


def _draw_eps(prob: SaddleProblem, mc: McConfig, stream: int):
    d = prob.model.param_dim
    g_t = _rng.generator(mc.seed, stream, 0)
    g_p = _rng.generator(mc.seed, stream, 1)
    return g_t.standard_normal((mc.n_theta_draws, d)), g_p.standard_normal((mc.n_theta_prime_draws, d))


def _pair_indices(k: int, kp: int):
    n_pairs = max(k, kp)
    return np.arange(n_pairs) % k, np.arange(n_pairs) % kp


def objective_given_eps(prob: SaddleProblem, phi: FullGaussian, nu: MeanFieldGaussian, eps_theta, eps_theta_prime):
    """Objective value for explicit standard-normal draws.

    Returns ``(value, std_error)`` where the error covers the contrast
    term only (the KL terms are exact).
    """
    eps_t = np.atleast_2d(np.asarray(eps_theta, dtype=float))
    eps_p = np.atleast_2d(np.asarray(eps_theta_prime, dtype=float))
    it, ip = _pair_indices(eps_t.shape[0], eps_p.shape[0])
    th = reparam_full(phi, eps_t)[it]
    tp = reparam_meanfield(nu, eps_p)[ip]
    c = contrast_matrix(prob.model, th, tp, prob.sample)
    h = c.mean(axis=1)
    kl_t = kl_full(phi, prob.prior_target)
    kl_c = kl_meanfield(nu, prob.prior_competitor)
    value = float(h.mean()) + (kl_t - kl_c) / prob.lam
    se = float(h.std(ddof=1) / math.sqrt(h.size)) if h.size > 1 else 0.0
    return value, se


def objective_mc(prob: SaddleProblem, phi: FullGaussian, nu: MeanFieldGaussian, mc: McConfig):
    """Unbiased seeded MC estimate of the saddle objective."""
    eps_t, eps_p = _draw_eps(prob, mc, stream=0)
    return objective_given_eps(prob, phi, nu, eps_t, eps_p)


def _contrast_grads(prob: SaddleProblem, phi: FullGaussian, nu: MeanFieldGaussian, eps_t, eps_p):
    """Gradient of the contrast term, plus its value.

    Pathwise route when the model supports it, score-function route with a
    mean baseline otherwise (d = 1 only).
    """
    model = prob.model
    d = model.param_dim
    k, kp = eps_t.shape[0], eps_p.shape[0]
    it, ip = _pair_indices(k, kp)
    th_all = reparam_full(phi, eps_t)
    tp_all = reparam_meanfield(nu, eps_p)
    th, tp = th_all[it], tp_all[ip]
    n_pairs = it.size
    n = prob.sample.n

    la = model.log_density_matrix(th, prob.sample)
    lb = model.log_density_matrix(tp, prob.sample)
    with np.errstate(invalid="ignore"):
        u = lb - la
    c = np.where(np.isnan(u), 0.0, np.copysign(np.tanh(np.abs(u) / 4.0), u))
    h = c.mean(axis=1)
    value = float(h.mean())

    if model.pathwise_ok:
        dcdu = 0.25 * (1.0 - c**2)
        dcdu[~np.isfinite(u)] = 0.0
        score_a = model.score_matrix(th, prob.sample)
        score_b = model.score_matrix(tp, prob.sample)
        g_th_pair = -np.einsum("ki,kij->kj", dcdu, score_a) / (n_pairs * n)
        g_tp_pair = np.einsum("ki,kij->kj", dcdu, score_b) / (n_pairs * n)
        g_th = np.zeros((k, d))
        g_tp = np.zeros((kp, d))
        np.add.at(g_th, it, g_th_pair)
        np.add.at(g_tp, ip, g_tp_pair)
        g_m = g_th.sum(axis=0)
        g_L = np.tril(g_th.T @ eps_t)
        g_mp = g_tp.sum(axis=0)
        g_s = 0.5 * np.exp(0.5 * nu.s) * (g_tp * eps_p).sum(axis=0)
        return value, SaddleGrads(m=g_m, chol_L=g_L, m_prime=g_mp, s=g_s)

    if d != 1:
        raise ValueError("score-function gradients are implemented for scalar models only")
    if k != kp:
        raise ValueError("score-function gradients require equal draw counts")
    centered = h - h.mean()
    e_t = eps_t[:, 0]
    e_p = eps_p[:, 0]
    ell = float(phi.chol_L[0, 0])
    sig = float(np.exp(0.5 * nu.s[0]))
    g_m = np.array([float(np.mean(centered * e_t / ell))])
    g_L = np.array([[float(np.mean(centered * (e_t**2 - 1.0) / ell))]])
    g_mp = np.array([float(np.mean(centered * e_p / sig))])
    g_s = np.array([float(np.mean(centered * (e_p**2 - 1.0) / 2.0))])
    return value, SaddleGrads(m=g_m, chol_L=g_L, m_prime=g_mp, s=g_s)


def grad_mc(prob: SaddleProblem, phi: FullGaussian, nu: MeanFieldGaussian, mc: McConfig) -> SaddleGrads:
    """MC gradient of the full objective in (m, L, m', s) coordinates.

    KL gradients are exact; with ``common_random_numbers`` the contrast
    part uses the very draws of :func:`objective_mc` at the same seed.
    """
    stream = 0 if mc.common_random_numbers else 1
    eps_t, eps_p = _draw_eps(prob, mc, stream=stream)
    _, g = _contrast_grads(prob, phi, nu, eps_t, eps_p)
    km, kl_ = kl_full_grads(phi, prob.prior_target)
    cm, cs = kl_meanfield_grads(nu, prob.prior_competitor)
    return SaddleGrads(
        m=g.m + km / prob.lam,
        chol_L=g.chol_L + kl_ / prob.lam,
        m_prime=g.m_prime - cm / prob.lam,
        s=g.s - cs / prob.lam,
    )


def _value_and_grads(prob, phi, nu, mc: McConfig, stream: int):
    eps_t, eps_p = _draw_eps(prob, mc, stream=stream)
    value, g = _contrast_grads(prob, phi, nu, eps_t, eps_p)
    kl_t = kl_full(phi, prob.prior_target)
    kl_c = kl_meanfield(nu, prob.prior_competitor)
    km, kl_ = kl_full_grads(phi, prob.prior_target)
    cm, cs = kl_meanfield_grads(nu, prob.prior_competitor)
    total = value + (kl_t - kl_c) / prob.lam
    grads = SaddleGrads(
        m=g.m + km / prob.lam,
        chol_L=g.chol_L + kl_ / prob.lam,
        m_prime=g.m_prime - cm / prob.lam,
        s=g.s - cs / prob.lam,
    )
    return total, grads


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------


def adam_step(state: SaddleState, grads: SaddleGrads, hyper: AdamHyper = AdamHyper(), objective_value: float = math.nan) -> SaddleState:
    """One Adam update: descend the target blocks, ascend the competitor
    blocks, then re-project onto the compact boxes."""
    g = _pack_grads(grads)
    if not np.all(np.isfinite(g)):
        raise SaddleDivergence("diverged: non-finite gradient", state)
    d = state.phi.dim
    x = _pack(state.phi, state.nu)
    v = _sign_vector(d) * g
    t = state.step + 1
    m1 = hyper.beta1 * state.adam_m1 + (1 - hyper.beta1) * v
    m2 = hyper.beta2 * state.adam_m2 + (1 - hyper.beta2) * v**2
    m1_hat = m1 / (1 - hyper.beta1**t)
    m2_hat = m2 / (1 - hyper.beta2**t)
    x_new = _project(x - hyper.lr * m1_hat / (np.sqrt(m2_hat) + hyper.eps_adam), d)
    phi, nu = _unpack(x_new, d)
    return SaddleState(phi=phi, nu=nu, step=t, adam_m1=m1, adam_m2=m2, trace=state.trace + (objective_value,))


def _mixed_step(state: SaddleState, grads: SaddleGrads, config: OptimizerConfig, objective_value: float = math.nan) -> SaddleState:
    """Adam descent on the target blocks, plain gradient ascent on the
    competitor blocks (see OptimizerConfig for why)."""
    g = _pack_grads(grads)
    if not np.all(np.isfinite(g)):
        raise SaddleDivergence("diverged: non-finite gradient", state)
    d = state.phi.dim
    n_phi = d + d * d
    hyper = config.adam
    x = _pack(state.phi, state.nu)
    t = state.step + 1
    m1 = state.adam_m1.copy()
    m2 = state.adam_m2.copy()
    m1[:n_phi] = hyper.beta1 * m1[:n_phi] + (1 - hyper.beta1) * g[:n_phi]
    m2[:n_phi] = hyper.beta2 * m2[:n_phi] + (1 - hyper.beta2) * g[:n_phi] ** 2
    m1_hat = m1[:n_phi] / (1 - hyper.beta1**t)
    m2_hat = m2[:n_phi] / (1 - hyper.beta2**t)
    x_new = x.copy()
    x_new[:n_phi] -= hyper.lr * m1_hat / (np.sqrt(m2_hat) + hyper.eps_adam)
    x_new[n_phi : n_phi + d] += config.nu_lr_mean * g[n_phi : n_phi + d]
    x_new[n_phi + d :] += config.nu_lr_logvar * g[n_phi + d :]
    phi, nu = _unpack(_project(x_new, d), d)
    return SaddleState(phi=phi, nu=nu, step=t, adam_m1=m1, adam_m2=m2, trace=state.trace + (objective_value,))


def extragradient_update(x: np.ndarray, vector_field: Callable[[np.ndarray], np.ndarray], stepsize: float, project=None) -> np.ndarray:
    """Projected extragradient update on a flat iterate.

    Half step along the field at x, full step along the field at the half
    point.  ``vector_field`` must return the descent direction.
    """
    proj = project if project is not None else (lambda z: z)
    half = proj(x - stepsize * vector_field(x))
    return proj(x - stepsize * vector_field(half))


def extragradient_step(state: SaddleState, prob: SaddleProblem, mc: McConfig, stepsize: float) -> SaddleState:
    """One projected stochastic extragradient step on (phi, nu).

    Fresh draws for the base-point and half-point gradients come from the
    seed's per-step substreams, so the update is deterministic in
    (state.step, mc.seed).
    """
    if not stepsize > 0:
        raise ValueError("stepsize must be positive")
    d = state.phi.dim
    sign = _sign_vector(d)

    value0, g0 = _value_and_grads(prob, state.phi, state.nu, mc, stream=2 * state.step)
    v0 = sign * _pack_grads(g0)
    if not np.all(np.isfinite(v0)):
        raise SaddleDivergence("diverged: non-finite gradient", state)
    x = _pack(state.phi, state.nu)
    half = _project(x - stepsize * v0, d)
    phi_h, nu_h = _unpack(half, d)
    _, gh = _value_and_grads(prob, phi_h, nu_h, mc, stream=2 * state.step + 1)
    vh = sign * _pack_grads(gh)
    if not np.all(np.isfinite(vh)):
        raise SaddleDivergence("diverged: non-finite gradient at half point", state)
    x_new = _project(x - stepsize * vh, d)
    phi, nu = _unpack(x_new, d)
    return SaddleState(
        phi=phi,
        nu=nu,
        step=state.step + 1,
        adam_m1=state.adam_m1,
        adam_m2=state.adam_m2,
        trace=state.trace + (value0,),
    )


def _probe_eg_stepsize(prob: SaddleProblem, state: SaddleState, mc: McConfig) -> float:
    """eta ~ 1/L_hat from gradient differences around the initial point."""
    rng = _rng.generator(mc.seed, 900)
    x0 = _pack(state.phi, state.nu)
    d = state.phi.dim
    ratios = []
    for j in range(6):
        delta = rng.standard_normal(x0.size) * 0.05
        xa = _project(x0 + delta, d)
        xb = _project(x0 - delta, d)
        pa, na = _unpack(xa, d)
        pb, nb = _unpack(xb, d)
        probe_mc = replace(mc, seed=_rng.derive_seed(mc.seed, 901, j))
        _, ga = _value_and_grads(prob, pa, na, probe_mc, stream=0)
        _, gb = _value_and_grads(prob, pb, nb, probe_mc, stream=0)
        dg = np.linalg.norm(_pack_grads(ga) - _pack_grads(gb))
        dx = np.linalg.norm(xa - xb)
        if dx > 0:
            ratios.append(dg / dx)
    l_hat = max(max(ratios), 1e-3) if ratios else 1.0
    return float(min(1.0 / l_hat, 0.5))


def fit_rho_posterior(prob: SaddleProblem, init: Optional[SaddleState] = None, config: Optional[OptimizerConfig] = None) -> FitResult:
    """Run the saddle solver and return the fitted posterior pair.

    The trace holds one objective estimate per iteration (from the same
    draws as that iteration's gradient).  Everything is deterministic in
    (config.mc.seed, config); a non-finite objective raises
    :class:`SaddleDivergence` carrying the last valid state.

    With ``config.avg_tail = q > 0`` the reported parameters are the
    average over the last ``q`` fraction of iterates, which strips the
    stationary jitter of a constant-step stochastic solver; the returned
    ``state`` is still the final iterate.
    """
    config = config or OptimizerConfig()
    state = init if init is not None else initial_state(prob)
    if state.adam_m1 is None or state.adam_m2 is None:
        n = _pack(state.phi, state.nu).size
        state = replace(state, adam_m1=np.zeros(n), adam_m2=np.zeros(n))
    eg_eta = None
    if config.method == "extragradient":
        eg_eta = config.eg_stepsize if config.eg_stepsize is not None else _probe_eg_stepsize(prob, state, config.mc)

    tail_from = config.n_iters - max(1, int(round(config.avg_tail * config.n_iters))) if config.avg_tail > 0 else None
    tail_sum = None
    tail_count = 0

    for t in range(config.n_iters):
        it_mc = replace(config.mc, seed=_rng.derive_seed(config.mc.seed, t))
        if config.method == "adam":
            value, grads = _value_and_grads(prob, state.phi, state.nu, it_mc, stream=0)
            if not math.isfinite(value):
                raise SaddleDivergence("diverged: non-finite objective", state)
            if config.nu_update == "adam":
                state = adam_step(state, grads, config.adam, objective_value=value)
            else:
                state = _mixed_step(state, grads, config, objective_value=value)
        else:
            state = extragradient_step(state, prob, it_mc, eg_eta)
            if not math.isfinite(state.trace[-1]):
                raise SaddleDivergence("diverged: non-finite objective", state)
        if tail_from is not None and t >= tail_from:
            x = _pack(state.phi, state.nu)
            tail_sum = x if tail_sum is None else tail_sum + x
            tail_count += 1

    if tail_sum is not None and tail_count > 0:
        phi, nu = _unpack(_project(tail_sum / tail_count, state.phi.dim), state.phi.dim)
    else:
        phi, nu = state.phi, state.nu
    return FitResult(phi=phi, nu=nu, trace=state.trace, state=state)


# ---------------------------------------------------------------------------
# softmax competitor functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InnerMaxConfig:
    n_iters: int = 150
    lr: float = 0.1
    n_draws: int = 64
    n_eval_draws: int = 4096
    seed: int = 0


def variational_softmax(prob: SaddleProblem, theta, inner: InnerMaxConfig = InnerMaxConfig()) -> float:
    """Inner maximization over the competitor family for a fixed theta.

    Adam-ascends  E_nu[contrast(theta, .)] - KL(nu || prior')/lam  and
    returns the achieved value (a lower bound on the exact log-average
    competitor functional), evaluated with a larger draw budget at the
    final iterate.
    """
    th = np.asarray(theta, dtype=float).reshape(1, -1)
    model = prob.model
    d = model.param_dim
    nu = MeanFieldGaussian(
        m_prime=prob.prior_competitor.mean.copy(),
        s=np.log(prob.prior_competitor.diag_variances()),
    )
    hyper = AdamHyper(lr=inner.lr)
    m1 = np.zeros(2 * d)
    m2 = np.zeros(2 * d)
    for t in range(inner.n_iters):
        rng = _rng.generator(inner.seed, t)
        eps = rng.standard_normal((inner.n_draws, d))
        tp = reparam_meanfield(nu, eps)
        la = model.log_density_matrix(np.repeat(th, tp.shape[0], axis=0), prob.sample)
        lb = model.log_density_matrix(tp, prob.sample)
        with np.errstate(invalid="ignore"):
            u = lb - la
        c = np.where(np.isnan(u), 0.0, np.copysign(np.tanh(np.abs(u) / 4.0), u))
        h = c.mean(axis=1)
        if model.pathwise_ok:
            dcdu = 0.25 * (1.0 - c**2)
            dcdu[~np.isfinite(u)] = 0.0
            score_b = model.score_matrix(tp, prob.sample)
            g_tp = np.einsum("ki,kij->kj", dcdu, score_b) / (tp.shape[0] * prob.sample.n)
            g_mp = g_tp.sum(axis=0)
            g_s = 0.5 * np.exp(0.5 * nu.s) * (g_tp * eps).sum(axis=0)
        else:
            centered = h - h.mean()
            sig = np.exp(0.5 * nu.s)
            g_mp = (centered[:, None] * eps / sig[None, :]).mean(axis=0)
            g_s = (centered[:, None] * (eps**2 - 1.0) / 2.0).mean(axis=0)
        cm, cs = kl_meanfield_grads(nu, prob.prior_competitor)
        g = np.concatenate([g_mp - cm / prob.lam, g_s - cs / prob.lam])
        if not np.all(np.isfinite(g)):
            raise RuntimeError("inner maximization diverged")
        m1 = hyper.beta1 * m1 + (1 - hyper.beta1) * g
        m2 = hyper.beta2 * m2 + (1 - hyper.beta2) * g**2
        m1h = m1 / (1 - hyper.beta1 ** (t + 1))
        m2h = m2 / (1 - hyper.beta2 ** (t + 1))
        upd = hyper.lr * m1h / (np.sqrt(m2h) + hyper.eps_adam)
        nu = MeanFieldGaussian(
            m_prime=np.clip(nu.m_prime + upd[:d], -MPRIME_BOX, MPRIME_BOX),
            s=np.clip(nu.s + upd[d:], LOGVAR_BOX[0], LOGVAR_BOX[1]),
        )
    rng = _rng.generator(inner.seed, 10_000_019)
    eps = rng.standard_normal((inner.n_eval_draws, d))
    tp = reparam_meanfield(nu, eps)
    c = contrast_matrix(model, np.repeat(th, tp.shape[0], axis=0), tp, prob.sample)
    value = float(c.mean(axis=1).mean()) - kl_meanfield(nu, prob.prior_competitor) / prob.lam
    return value


def logmeanexp_softmax(prob: SaddleProblem, theta, n_prior_draws: int, seed: int):
    """Exact-softmax MC estimate: (1/lam) log mean_j exp(lam * contrast_j)
    over competitor draws from the prior, with max subtraction.

    Returns (value, std_error); the error is the delta-method propagation
    of the mean-of-exponentials error.
    """
    if n_prior_draws < 2:
        raise ValueError("need at least 2 prior draws")
    th = np.asarray(theta, dtype=float).reshape(1, -1)
    model = prob.model
    d = model.param_dim
    rng = _rng.generator(seed, 0)
    cov = prob.prior_competitor.cov_matrix()
    lp = np.linalg.cholesky(cov)
    r_vals = np.empty(n_prior_draws)
    chunk = 8192
    for start in range(0, n_prior_draws, chunk):
        size = min(chunk, n_prior_draws - start)
        draws = prob.prior_competitor.mean[None, :] + rng.standard_normal((size, d)) @ lp.T
        c = contrast_matrix(model, np.repeat(th, size, axis=0), draws, prob.sample)
        r_vals[start : start + size] = c.mean(axis=1)
    lam = prob.lam
    mx = float(np.max(lam * r_vals))
    w = np.exp(lam * r_vals - mx)
    mean_w = float(w.mean())
    value = (mx + math.log(mean_w)) / lam
    se_w = float(w.std(ddof=1) / math.sqrt(n_prior_draws))
    return value, se_w / (lam * mean_w)


# ---------------------------------------------------------------------------
# geometry probes
# ---------------------------------------------------------------------------


def nu_hessian_fd(prob: SaddleProblem, phi: FullGaussian, nu: MeanFieldGaussian, mc: McConfig, step: float = 1e-3) -> np.ndarray:
    """Central finite-difference Hessian of the objective in the competitor
    coordinates (m', s), at fixed draws (common random numbers)."""
    d = nu.dim
    z0 = np.concatenate([nu.m_prime, nu.s])
    eps_t, eps_p = _draw_eps(prob, mc, stream=0)

    def f(z):
        nv = MeanFieldGaussian(m_prime=z[:d], s=z[d:])
        val, _ = objective_given_eps(prob, phi, nv, eps_t, eps_p)
        return val

    dim = 2 * d
    hess = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            ea = np.zeros(dim)
            eb = np.zeros(dim)
            ea[a] = step
            eb[b] = step
            if a == b:
                val = (f(z0 + ea) - 2.0 * f(z0) + f(z0 - ea)) / step**2
            else:
                val = (f(z0 + ea + eb) - f(z0 + ea - eb) - f(z0 - ea + eb) + f(z0 - ea - eb)) / (4.0 * step**2)
            hess[a, b] = hess[b, a] = val
    return hess


def grad_lipschitz_estimate(prob: SaddleProblem, mc: McConfig, n_pairs: int = 20, spread: float = 0.5, seed: int = 0) -> float:
    """Empirical gradient-Lipschitz ratio max ||g(x)-g(y)|| / ||x-y|| over
    random in-box parameter pairs around the prior initialization."""
    state = initial_state(prob)
    x0 = _pack(state.phi, state.nu)
    d = state.phi.dim
    rng = _rng.generator(seed, 7)
    worst = 0.0
    for j in range(n_pairs):
        xa = _project(x0 + spread * rng.standard_normal(x0.size), d)
        xb = _project(xa + 0.1 * spread * rng.standard_normal(x0.size), d)
        pa, na = _unpack(xa, d)
        pb, nb = _unpack(xb, d)
        pair_mc = replace(mc, seed=_rng.derive_seed(mc.seed, 77, j))
        _, ga = _value_and_grads(prob, pa, na, pair_mc, stream=0)
        _, gb = _value_and_grads(prob, pb, nb, pair_mc, stream=0)
        dx = float(np.linalg.norm(xa - xb))
        if dx == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(_pack_grads(ga) - _pack_grads(gb)) / dx))
    return worst
