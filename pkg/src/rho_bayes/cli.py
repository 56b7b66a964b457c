"""Batch command-line front end.

Four subcommands: ``experiment`` (replication harness -> risk_table.csv),
``fit`` (single posterior fit -> fit.json), ``bound`` (certificate
coverage -> bound.json), ``selfcheck`` (fast property suites).  Every run
writes a ``manifest.json`` with the fully resolved configuration; re-running
with ``--config manifest.json`` reproduces the data outputs byte for byte,
independent of ``--jobs``.

Configs are flat ``key=value`` text files (or a manifest JSON); explicit
command-line flags win over config-file values.  Exit codes: 0 success,
1 selfcheck failure, 2 bad configuration (the message names the offending
key), 3 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, _rng, bounds, contrast, experiments, hellinger, saddle
from .models import GaussianLocationModel, PoissonIntensityModel, Sample
from .variational import FullGaussian, GaussianPrior, MeanFieldGaussian

__all__ = ["main", "cmd_experiment", "cmd_fit", "cmd_bound", "cmd_selfcheck"]


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

_EXPERIMENT_KEYS = {
    "scenario": str, "n": int, "tau": float, "eps": str, "trials": int, "seed": int,
    "jobs": int, "optimizer": str, "iters": int, "mc_draws": int, "prior_variance": float,
    "csv_path": str, "csv_target": str, "out": str,
}
_FIT_KEYS = {
    "scenario": str, "n": int, "tau": float, "eps": float, "seed": int, "data": str,
    "optimizer": str, "iters": int, "mc_draws": int, "prior_variance": float, "out": str,
}
_BOUND_KEYS = {
    "scenario": str, "n": int, "tau": float, "delta": float, "trials": int, "seed": int,
    "eps": float, "iters": int, "mc_draws": int, "prior_variance": float, "out": str,
}


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config: file not found: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        obj = json.loads(text)
        return dict(obj.get("config", obj))
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config: line {lineno} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _resolve(args: argparse.Namespace, schema: dict) -> dict:
    """Merge config file and flags (flags win) and coerce types."""
    merged: dict = {}
    if getattr(args, "config", None):
        for key, val in _load_config_file(args.config).items():
            if key in ("jobs",) and key not in schema:
                continue
            if key not in schema:
                raise ConfigError(f"{key}: unknown configuration key")
            merged[key] = val
    for key in schema:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    out = {}
    for key, val in merged.items():
        if val is None or isinstance(val, (list, tuple)):
            out[key] = val  # structured values (e.g. eps lists from a manifest) pass through
            continue
        caster = schema[key]
        try:
            out[key] = val if isinstance(val, caster) and not isinstance(val, bool) else caster(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot interpret value {val!r}")
    return out


def _parse_eps_list(raw) -> tuple:
    if isinstance(raw, (list, tuple)):
        vals = [float(v) for v in raw]
    else:
        try:
            vals = [float(tok) for tok in str(raw).split(",") if tok.strip() != ""]
        except ValueError:
            raise ConfigError(f"eps: cannot parse contamination list {raw!r}")
    if not vals:
        raise ConfigError("eps: needs at least one value")
    for v in vals:
        if not 0.0 <= v < 1.0:
            raise ConfigError(f"eps: value {v} outside [0, 1)")
    return tuple(vals)


def _out_dir(cfg: dict) -> Path:
    env = os.environ.get("RHO_BAYES_OUT")
    path = Path(cfg.get("out") or env or "out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _optimizer_config(cfg: dict, scenario: str) -> saddle.OptimizerConfig:
    base = experiments.default_optimizer(scenario)
    if cfg.get("optimizer"):
        method = cfg["optimizer"]
        if method not in ("adam", "extragradient"):
            raise ConfigError(f"optimizer: must be adam or extragradient, got {method!r}")
        base = replace(base, method=method)
    if cfg.get("iters"):
        if int(cfg["iters"]) < 1:
            raise ConfigError("iters: must be at least 1")
        base = replace(base, n_iters=int(cfg["iters"]))
    if cfg.get("mc_draws"):
        k = int(cfg["mc_draws"])
        if k < 1:
            raise ConfigError("mc_draws: must be at least 1")
        base = replace(base, mc=replace(base.mc, n_theta_draws=k, n_theta_prime_draws=k))
    return base


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _manifest(path: Path, command: str, config: dict, seed: int, outputs, duration: float) -> None:
    _write_json(path, {
        "command": command,
        "version": __version__,
        "master_seed": int(seed),
        "config": config,
        "outputs": sorted(str(o) for o in outputs),
        "duration_s": duration,
    })


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------


def cmd_experiment(args: argparse.Namespace) -> int:
    t0 = time.time()
    cfg = _resolve(args, _EXPERIMENT_KEYS)
    if "scenario" not in cfg:
        raise ConfigError("scenario: required")
    scenario = cfg["scenario"]
    if scenario not in experiments.SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}")
    eps = _parse_eps_list(cfg.get("eps", "0,0.05,0.08,0.1"))
    trials = int(cfg.get("trials", 200))
    if trials < 1:
        raise ConfigError("trials: must be at least 1")
    tau = float(cfg.get("tau", 0.5))
    if tau <= 0:
        raise ConfigError("tau: must be positive")
    n = int(cfg.get("n", 200))
    seed = int(cfg.get("seed", 0))
    jobs = int(cfg.get("jobs", 1))
    optimizer = _optimizer_config(cfg, scenario)
    try:
        exp = experiments.ExperimentConfig(
            scenario=scenario, n=n, epsilon_grid=eps, tau=tau, trials=trials,
            master_seed=seed, prior_variance=float(cfg.get("prior_variance", 4.0)),
            optimizer=optimizer, csv_path=cfg.get("csv_path"), csv_target=cfg.get("csv_target"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    out = _out_dir(cfg)
    table = experiments.run_trials(exp, jobs=jobs)
    csv_path = out / "risk_table.csv"
    table.to_csv(csv_path)
    resolved = {
        "scenario": scenario, "n": n, "tau": tau, "eps": list(eps), "trials": trials,
        "seed": seed, "optimizer": optimizer.method, "iters": optimizer.n_iters,
        "mc_draws": optimizer.mc.n_theta_draws, "prior_variance": exp.prior_variance,
        "csv_path": exp.csv_path, "csv_target": exp.csv_target,
    }
    _manifest(out / "manifest.json", "experiment", resolved, seed, [csv_path.name], time.time() - t0)
    n_errors = sum(r.errors for r in table.rows)
    if n_errors:
        print(f"warning: {n_errors} trial failures recorded in the errors column", file=sys.stderr)
    print(f"wrote {csv_path} ({len(table.rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _read_data_file(path: str) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"data: file not found: {path}")
    vals = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise ConfigError(f"data: line {lineno} is not a number: {line!r}")
    if not vals:
        raise ConfigError("data: file holds no observations")
    return np.array(vals)


def cmd_fit(args: argparse.Namespace) -> int:
    t0 = time.time()
    cfg = _resolve(args, _FIT_KEYS)
    scenario = cfg.get("scenario", experiments.GAUSSIAN)
    if scenario not in experiments.SCENARIOS or scenario == experiments.BIRGE:
        raise ConfigError(f"scenario: cannot fit scenario {scenario!r}")
    if scenario == experiments.CSV:
        raise ConfigError("scenario: fit csv data via `experiment --scenario csv_regression`")
    n = int(cfg.get("n", 200))
    tau = float(cfg.get("tau", 0.5))
    eps = float(cfg.get("eps", 0.0))
    seed = int(cfg.get("seed", 0))
    prior_var = float(cfg.get("prior_variance", 4.0))
    optimizer = _optimizer_config(cfg, scenario)
    data_seed = _rng.derive_seed(seed, 0, 0, 0)
    fit_seed = _rng.derive_seed(seed, 0, 0, 1)
    if scenario in (experiments.FOURIER, experiments.CORRELATED):
        if cfg.get("data"):
            raise ConfigError("data: regression fits use generator flags, not a data file")
        if scenario == experiments.FOURIER:
            design, y, _ = experiments.gen_fourier_regression(n, 6, eps, seed=data_seed)
        else:
            design, y, _ = experiments.gen_correlated_regression(n, 10, 0.7, eps, seed=data_seed)
        data = (design, y)
    elif cfg.get("data"):
        data = Sample(_read_data_file(cfg["data"]))
        n = data.n
    else:
        data = experiments.gen_contaminated(scenario, n, eps, data_seed)
    try:
        est, fit = experiments.fit_rho_scenario(scenario, data, tau, fit_seed, prior_var, optimizer)
    except saddle.SaddleDivergence as exc:
        print(f"fit diverged: {exc}", file=sys.stderr)
        print(f"last trace: {list(exc.last_state.trace)[-5:]}", file=sys.stderr)
        return 3
    out = _out_dir(cfg)
    fit_path = out / "fit.json"
    _write_json(fit_path, {
        "phi_mean": fit.phi.m.tolist(),
        "phi_chol": fit.phi.chol_L.tolist(),
        "nu_mean": fit.nu.m_prime.tolist(),
        "nu_logvar": fit.nu.s.tolist(),
        "rho_estimate": est if isinstance(est, float) else np.asarray(est).tolist(),
        "objective_trace": [v for v in fit.trace],
        "seed": seed,
    })
    resolved = {"scenario": scenario, "n": n, "tau": tau, "eps": eps, "seed": seed,
                "optimizer": optimizer.method, "iters": optimizer.n_iters,
                "mc_draws": optimizer.mc.n_theta_draws, "prior_variance": prior_var,
                "data": cfg.get("data")}
    _manifest(out / "manifest.json", "fit", resolved, seed, [fit_path.name], time.time() - t0)
    print(f"wrote {fit_path}")
    return 0


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def _hellinger_oracle(scenario: str, eps: float):
    """theta-draws -> H^2(data law, model law), vectorized.

    Well-specified (eps = 0) laws use closed forms against the scenario
    truth; the contaminated Gaussian case interpolates a quadrature grid of
    mixture-vs-model distances.
    """
    if eps == 0.0:
        if scenario == experiments.GAUSSIAN:
            return lambda t: 1.0 - np.exp(-(np.asarray(t)[:, 0] ** 2) / 8.0)
        if scenario == experiments.POISSON:
            lam_star = 3.0
            return lambda t: 1.0 - np.exp(-((np.sqrt(np.exp(np.asarray(t)[:, 0])) - math.sqrt(lam_star)) ** 2) / 2.0)
        if scenario == experiments.UNIFORM:
            def unif(t):
                theta = np.exp(np.asarray(t)[:, 0])
                lo = np.minimum(theta, 1.0)
                hi = np.maximum(theta, 1.0)
                return 1.0 - np.sqrt(lo / hi)
            return unif
        raise ConfigError(f"scenario: no Hellinger oracle for {scenario!r}")
    if scenario != experiments.GAUSSIAN:
        raise ConfigError("eps: contaminated bound oracles exist for gaussian_location only")
    grid = np.linspace(-4.0, 12.0, 321)
    vals = np.array([
        hellinger.gaussian_mixture_model_hellinger((1.0 - eps, eps), (0.0, 8.0), float(t)).h_sq
        for t in grid
    ])
    return lambda t: np.interp(np.asarray(t)[:, 0], grid, vals)


def cmd_bound(args: argparse.Namespace) -> int:
    t0 = time.time()
    cfg = _resolve(args, _BOUND_KEYS)
    scenario = cfg.get("scenario", experiments.GAUSSIAN)
    if scenario not in (experiments.GAUSSIAN, experiments.POISSON, experiments.UNIFORM):
        raise ConfigError(f"scenario: bound evaluation supports the i.i.d. scenarios, not {scenario!r}")
    n = int(cfg.get("n", 200))
    tau = float(cfg.get("tau", 0.125))
    delta = float(cfg.get("delta", 0.05))
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta: must lie in (0, 1)")
    trials = int(cfg.get("trials", 200))
    if trials < 1:
        raise ConfigError("trials: must be at least 1")
    eps = float(cfg.get("eps", 0.0))
    seed = int(cfg.get("seed", 0))
    prior_var = float(cfg.get("prior_variance", 4.0))
    optimizer = _optimizer_config(cfg, scenario)
    oracle = _hellinger_oracle(scenario, eps)
    lam = tau * n
    reports = []
    for trial in range(trials):
        data_seed = _rng.derive_seed(seed, 0, trial, 0)
        fit_seed = _rng.derive_seed(seed, 0, trial, 1)
        mc_seed = _rng.derive_seed(seed, 0, trial, 2)
        sample = experiments.gen_contaminated(scenario, n, eps, data_seed)
        _, fit = experiments.fit_rho_scenario(scenario, sample, tau, fit_seed, prior_var, optimizer)
        model = experiments.scenario_model(scenario)
        prob = saddle.SaddleProblem(
            model=model, sample=sample,
            prior_target=GaussianPrior.isotropic(1, prior_var),
            prior_competitor=GaussianPrior.isotropic(1, prior_var),
            lam=lam,
        )
        rep = bounds.oracle_rhs_estimate(prob, fit.phi, fit.nu, delta, oracle, seed=mc_seed)
        reports.append(rep)
    coverage = float(np.mean([r.holds for r in reports]))
    coeffs = bounds.corollary_coefficients(n, lam)
    out = _out_dir(cfg)
    bound_path = out / "bound.json"
    _write_json(bound_path, {
        "scenario": scenario,
        "n": n,
        "tau": tau,
        "lambda": lam,
        "delta": delta,
        "eps": eps,
        "beta": bounds.beta_n_lambda(n, lam),
        "log_inv_delta_over_lambda": math.log(1.0 / delta) / lam,
        "coefficients": {
            "target_coef": coeffs.target_coef,
            "competitor_coef": coeffs.competitor_coef,
            "sane": coeffs.sane,
            "competitor_within_two_thirds": coeffs.competitor_within_two_thirds,
        },
        "note": bounds.G_QUARTER_NOTE,
        "coverage": coverage,
        "trials": [
            {"lhs": r.lhs_estimate, "rhs": r.rhs_estimate, "holds": r.holds,
             "components": r.components}
            for r in reports
        ],
    })
    resolved = {"scenario": scenario, "n": n, "tau": tau, "delta": delta, "trials": trials,
                "seed": seed, "eps": eps, "iters": optimizer.n_iters,
                "mc_draws": optimizer.mc.n_theta_draws, "prior_variance": prior_var}
    _manifest(out / "manifest.json", "bound", resolved, seed, [bound_path.name], time.time() - t0)
    print(f"wrote {bound_path}: coverage {coverage:.3f} over {trials} trials")
    return 0


# ---------------------------------------------------------------------------
# selfcheck
# ---------------------------------------------------------------------------


def _selfcheck_properties(fault: str = ""):
    """Fast property suites; `fault` corrupts a named code path so the
    checker can prove it catches regressions."""
    checks = []

    def psi_eval(x):
        v = contrast.psi(x)
        if fault == "psi-sign" and x > 1.0:
            return -v
        return v

    xs = np.logspace(-6, 6, 4001)
    anti = max(abs(psi_eval(1.0 / x) + psi_eval(x)) for x in xs)
    checks.append(("psi-antisymmetry", anti <= 1e-12, f"max |psi(1/x)+psi(x)| = {anti:.2e}"))

    grid = np.logspace(math.log10(0.25), 2, 2001)
    pv = np.array([psi_eval(x) for x in grid])
    lip = np.max(np.abs(np.diff(pv)) / np.diff(grid))
    checks.append(("psi-lipschitz-2", lip <= 2.0 + 1e-12, f"max slope {lip:.4f}"))

    us = np.linspace(-30.0, 30.0, 2001)
    ident = max(abs(contrast.psi_of_log_ratio(u) - psi_eval(math.exp(u))) for u in us if abs(u) < 100)
    checks.append(("psi-tanh-identity", ident <= 1e-12, f"max gap {ident:.2e}"))

    h = 1e-5
    dmax = max(abs(contrast.psi_of_log_ratio(u + h) - contrast.psi_of_log_ratio(u - h)) / (2 * h) for u in us)
    checks.append(("psi-derivative-bound", dmax <= 0.25 + 1e-6, f"max |phi'| = {dmax:.6f}"))

    g_model = GaussianLocationModel()
    worst = 0.0
    for mu1, mu2 in ((0.0, 1.0), (-2.0, 0.5), (1.0, 4.0)):
        closed = hellinger.hellinger_sq_closed(g_model, [mu1], [mu2]).h_sq
        quad = hellinger.hellinger_sq_quadrature(
            lambda x, m=mu1: np.exp(-((x - m) ** 2) / 2) / math.sqrt(2 * math.pi),
            lambda x, m=mu2: np.exp(-((x - m) ** 2) / 2) / math.sqrt(2 * math.pi),
            (min(mu1, mu2) - 12.0, max(mu1, mu2) + 12.0),
        ).h_sq
        worst = max(worst, abs(closed - quad))
    for la, lb in ((1.0, 2.0), (3.0, 30.0)):
        closed = hellinger.hellinger_sq_closed(PoissonIntensityModel(), [math.log(la)], [math.log(lb)]).h_sq
        series = hellinger.poisson_hellinger_series(la, lb).h_sq
        worst = max(worst, abs(closed - series))
    checks.append(("hellinger-closed-vs-oracle", worst <= 1e-8, f"max gap {worst:.2e}"))

    rng = np.random.default_rng(0)
    x = rng.normal(0.2, 1.0, 40)
    prob = saddle.SaddleProblem(
        model=g_model, sample=Sample(x),
        prior_target=GaussianPrior.isotropic(1, 4.0),
        prior_competitor=GaussianPrior.isotropic(1, 4.0), lam=10.0)
    phi = FullGaussian(m=[0.3], chol_L=[[0.7]])
    nu = MeanFieldGaussian(m_prime=[0.0], s=[0.2])
    mc = saddle.McConfig(seed=1)
    g = saddle.grad_mc(prob, phi, nu, mc)
    step = 1e-5
    fd = (saddle.objective_mc(prob, FullGaussian(m=[0.3 + step], chol_L=[[0.7]]), nu, mc)[0]
          - saddle.objective_mc(prob, FullGaussian(m=[0.3 - step], chol_L=[[0.7]]), nu, mc)[0]) / (2 * step)
    rel = abs(g.m[0] - fd) / max(abs(fd), 1e-12)
    checks.append(("reparam-gradient-check", rel <= 1e-3, f"rel err {rel:.2e}"))

    hess = saddle.nu_hessian_fd(prob, phi, nu, saddle.McConfig(seed=2, n_theta_draws=128, n_theta_prime_draws=128))
    top = float(np.max(np.linalg.eigvalsh(hess)))
    checks.append(("competitor-concavity", top < 0.0, f"max eigenvalue {top:.4f}"))
    return checks


def cmd_selfcheck(args: argparse.Namespace) -> int:
    fault = getattr(args, "inject_fault", "") or ""
    checks = _selfcheck_properties(fault)
    width = max(len(name) for name, _, _ in checks)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(sub, keys):
    if "scenario" in keys:
        sub.add_argument("--scenario", type=str, default=None)
    if "n" in keys:
        sub.add_argument("--n", type=int, default=None)
    if "tau" in keys:
        sub.add_argument("--tau", type=float, default=None)
    if "trials" in keys:
        sub.add_argument("--trials", type=int, default=None)
    if "seed" in keys:
        sub.add_argument("--seed", type=int, default=None)
    if "delta" in keys:
        sub.add_argument("--delta", type=float, default=None)
    sub.add_argument("--optimizer", type=str, default=None, choices=(None, "adam", "extragradient"))
    sub.add_argument("--iters", type=int, default=None)
    sub.add_argument("--mc-draws", dest="mc_draws", type=int, default=None)
    sub.add_argument("--prior-variance", dest="prior_variance", type=float, default=None)
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--config", type=str, default=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rho-bayes", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_exp = subs.add_parser("experiment", help="run a replication experiment")
    _add_common(p_exp, _EXPERIMENT_KEYS)
    p_exp.add_argument("--eps", type=str, default=None, help="comma-separated contamination levels")
    p_exp.add_argument("--jobs", type=int, default=None)
    p_exp.add_argument("--csv-path", dest="csv_path", type=str, default=None)
    p_exp.add_argument("--csv-target", dest="csv_target", type=str, default=None)

    p_fit = subs.add_parser("fit", help="fit a single posterior")
    _add_common(p_fit, _FIT_KEYS)
    p_fit.add_argument("--eps", type=float, default=None)
    p_fit.add_argument("--data", type=str, default=None, help="file with one observation per line")

    p_bound = subs.add_parser("bound", help="evaluate the risk-bound certificate")
    _add_common(p_bound, _BOUND_KEYS)
    p_bound.add_argument("--eps", type=float, default=None)

    p_check = subs.add_parser("selfcheck", help="run fast property suites")
    p_check.add_argument("--inject-fault", dest="inject_fault", type=str, default="", help=argparse.SUPPRESS)

    args = parser.parse_args(argv)
    try:
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "bound":
            return cmd_bound(args)
        return cmd_selfcheck(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
