import math

import numpy as np
import pytest

from rho_bayes import experiments as ex

from rho_bayes.models import Sample


def test_gen_contaminated_eps_zero_is_clean():
    s = ex.gen_contaminated(ex.GAUSSIAN, 100_000, 0.0, seed=1)
    assert abs(s.values.mean()) <= 4.0 / math.sqrt(100_000)


def test_gen_contaminated_eps_one_uniform_all_outliers():
    s = ex.gen_contaminated(ex.UNIFORM, 500, 1.0, seed=2)
    assert np.all((s.values >= 101.0) & (s.values <= 102.0))


def test_gen_contaminated_mixture_mean():
    s = ex.gen_contaminated(ex.GAUSSIAN, 100_000, 0.10, seed=3)
    sd = math.sqrt(6.76 / 100_000)  # mixture variance 6.76
    assert s.values.mean() == pytest.approx(0.8, abs=3 * sd)


def test_gen_contaminated_validation():
    with pytest.raises(ValueError):
        ex.gen_contaminated(ex.GAUSSIAN, 10, 1.5, seed=0)
    with pytest.raises(ValueError):
        ex.gen_contaminated(ex.FOURIER, 10, 0.0, seed=0)


def test_gen_contaminated_bitwise_reproducible():
    a = ex.gen_contaminated(ex.POISSON, 500, 0.1, seed=11)
    b = ex.gen_contaminated(ex.POISSON, 500, 0.1, seed=11)
    assert np.array_equal(a.values, b.values)


def test_fourier_design_and_truth():
    design, y, beta = ex.gen_fourier_regression(200, 6, 0.0, seed=4)
    assert design.shape == (200, 13)
    # f*(0.25) = sin(pi/2) + 0.3 cos(1.5 pi) = 1
    w = np.linspace(0, 1, 200, endpoint=False)
    idx = int(np.argmin(np.abs(w - 0.25)))
    assert (design @ beta)[idx] == pytest.approx(1.0, abs=1e-12)
    assert np.count_nonzero(beta) == 2
    # generator determinism: responses reconstructable from the seed
    _, y2, _ = ex.gen_fourier_regression(200, 6, 0.0, seed=4)
    assert np.array_equal(y, y2)


def test_pareto_magnitudes_bounded_below():
    rng = np.random.default_rng(0)
    draws = ex._pareto_two_sided(rng, 10_000, 6.0, 2.0)
    assert np.abs(draws).min() >= 6.0
    draws = ex._pareto_two_sided(rng, 10_000, 10.0, 1.5)
    assert np.abs(draws).min() >= 10.0
    # signs are balanced
    assert abs(np.mean(np.sign(draws))) <= 0.05


def test_correlated_design_properties():
    design, y, beta = ex.gen_correlated_regression(400, 10, 0.7, 0.0, seed=5)
    assert design.shape == (400, 11)
    assert np.count_nonzero(beta) == 5
    assert np.allclose(beta[:6], [0.5, 1.0, -0.8, 0.0, 0.6, -0.5])
    # standardized columns
    cols = design[:, 1:]
    assert np.max(np.abs(cols.mean(axis=0))) <= 1e-12
    assert np.allclose(cols.std(axis=0), 1.0, atol=1e-12)
    # Toeplitz correlation rho^|j-k|: entry (1,3) targets 0.49
    emp = np.corrcoef(cols.T)
    assert emp[0, 2] == pytest.approx(0.49, abs=0.15)


def test_csv_ingestion(tmp_path):
    path = tmp_path / "toy.csv"
    rows = ["x1,x2,y"]
    rng = np.random.default_rng(0)
    for i in range(50):
        rows.append(f"{rng.normal():.6f},{rng.normal():.6f},{float(i % 10)}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    clean = ex.ingest_csv_regression(path, "y", 0.0, seed=1)
    assert clean.train_design.shape[0] == 40 and clean.test_design.shape[0] == 10
    assert clean.train_design.shape[1] == 3  # intercept + 2 features
    # standardization by train statistics
    assert np.max(np.abs(clean.train_design[:, 1:].mean(axis=0))) <= 1e-12

    dirty = ex.ingest_csv_regression(path, "y", 0.2, seed=1)
    # same split; contaminated labels moved by exactly +-15 * MAD
    moved = np.abs(dirty.train_y - clean.train_y)
    changed = moved > 0
    assert changed.sum() == round(0.2 * 40)
    assert np.allclose(moved[changed], 15.0 * clean.mad)
    assert np.array_equal(dirty.test_y, clean.test_y)

    # hand computation: median(|Y - median(Y)|) on the train labels
    med = np.median(clean.train_y)
    assert clean.mad == pytest.approx(float(np.median(np.abs(clean.train_y - med))), abs=1e-12)
    assert clean.mad == pytest.approx(2.5, abs=1e-12)  # labels cycle 0..9
    assert np.allclose(moved[changed], 37.5)


def test_csv_ingestion_constant_target_warns(tmp_path):
    path = tmp_path / "const.csv"
    lines = ["a,y"] + [f"{i},5.0" for i in range(20)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.warns(UserWarning, match="MAD"):
        data = ex.ingest_csv_regression(path, "y", 0.3, seed=0)
    assert np.all(data.train_y == 5.0)


def test_csv_ingestion_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1.0,oops\n", encoding="utf-8")
    with pytest.raises(ValueError, match="row 2, column 'b'"):
        ex.ingest_csv_regression(path, "a", 0.0, seed=0)
    with pytest.raises(ValueError, match="target column"):
        ex.ingest_csv_regression(path, "zzz", 0.0, seed=0)


def test_baseline_estimators_arithmetic():
    g = ex.baseline_estimators(ex.GAUSSIAN, Sample(np.array([1.0, 1.0, 1.0, 1.0])))
    assert g["mle"] == pytest.approx(1.0)
    assert g["bayes"] == pytest.approx(4.0 / 4.25, abs=1e-12)

    p = ex.baseline_estimators(ex.POISSON, Sample(np.array([3.0, 3.0, 3.0])))
    assert p["bayes"] == pytest.approx(10.0 / 4.0, abs=1e-12)

    vals = np.linspace(0.05, 0.9, 10)
    u = ex.baseline_estimators(ex.UNIFORM, Sample(vals))
    assert u["mle"] == pytest.approx(0.9)
    assert u["bayes"] == pytest.approx(1.1 * 0.9, abs=1e-12)


def test_huber_limits_and_outlier_resistance():
    rng = np.random.default_rng(3)
    design = np.column_stack([np.ones(50), rng.standard_normal(50)])
    beta_true = np.array([0.5, 2.0])
    y = design @ beta_true + rng.standard_normal(50) * 0.3

    ols = ex.baseline_estimators(ex.FOURIER, (design, y))["ols"]
    big_gamma = ex.huber_fit(design, y, [1e6])
    assert np.allclose(big_gamma, ols, atol=1e-6)

    y_out = y.copy()
    y_out[7] += 80.0
    ols_out = ex.baseline_estimators(ex.FOURIER, (design, y_out))["ols"]
    hub = ex.huber_fit(design, y_out, [1.345])
    assert abs(hub[1] - beta_true[1]) < abs(ols_out[1] - beta_true[1])

    # single-element grid skips cross-validation
    only = ex.huber_fit(design, y, [2.0], cv_folds=4, seed=9)
    assert np.allclose(only, ex.huber_fit(design, y, [2.0]))


def test_run_trials_minimal_and_deterministic():
    cfg = ex.ExperimentConfig(scenario=ex.GAUSSIAN, n=50, epsilon_grid=(0.0,), trials=1,
                              master_seed=7, optimizer=ex.default_optimizer(ex.GAUSSIAN))
    table = ex.run_trials(cfg)
    assert {r.estimator for r in table.rows} == {"mle", "bayes", "rho"}
    row = table.get("mle", 0.0)
    # T=1: the risk is the single squared error (X bar - 0)^2
    data = ex.gen_contaminated(ex.GAUSSIAN, 50, 0.0, ex._rng.derive_seed(7, 0, 0, 0))
    assert row.posterior_risk == pytest.approx(data.values.mean() ** 2, abs=1e-15)
    assert row.ci_halfwidth == 0.0 and row.n_trials == 1

    again = ex.run_trials(cfg)
    assert again == table
    parallel = ex.run_trials(cfg, jobs=2)
    assert parallel == table


def test_risk_rows_rmse_is_sqrt_risk():
    cfg = ex.ExperimentConfig(scenario=ex.POISSON, n=60, epsilon_grid=(0.0, 0.1), trials=3, master_seed=1)
    table = ex.run_trials(cfg)
    for row in table.rows:
        assert row.rmse**2 == pytest.approx(row.posterior_risk, abs=1e-9)


def test_regression_rows_include_prediction_metric():
    cfg = ex.ExperimentConfig(scenario=ex.FOURIER, n=60, epsilon_grid=(0.0,), trials=2, master_seed=3)
    table = ex.run_trials(cfg)
    names = {r.estimator for r in table.rows}
    assert {"ols", "bayes", "rho", "ols_pred", "bayes_pred", "rho_pred"} == names


def test_csv_scenario_end_to_end(tmp_path):
    path = tmp_path / "synth.csv"
    rng = np.random.default_rng(12)
    n = 120
    x1, x2 = rng.standard_normal(n), rng.standard_normal(n)
    y = 1.0 + 2.0 * x1 - 1.0 * x2 + 0.3 * rng.standard_normal(n)
    lines = ["x1,x2,y"] + [f"{a:.8f},{b:.8f},{c:.8f}" for a, b, c in zip(x1, x2, y)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = ex.ExperimentConfig(scenario=ex.CSV, epsilon_grid=(0.0, 0.2), trials=2, master_seed=4,
                              csv_path=str(path), csv_target="y",
                              optimizer=ex.default_optimizer(ex.CSV))
    table = ex.run_trials(cfg)
    assert {r.estimator for r in table.rows} == {"ols", "huber", "rho"}
    # clean test labels: every estimator predicts well at eps = 0, and the
    # robust fits resist heavy label contamination better than OLS
    for name in ("ols", "huber", "rho"):
        assert table.get(name, 0.0).posterior_risk < 0.5
    assert table.get("rho", 0.2).posterior_risk < table.get("ols", 0.2).posterior_risk
    assert table.get("huber", 0.2).posterior_risk < table.get("ols", 0.2).posterior_risk


def test_birge_demo_values_and_support_arithmetic():
    res = ex.birge_mle_demo(100, 400, seed=5)
    assert res.projection_hellinger < 5.0 / 400.0
    assert res.projection_hellinger == pytest.approx(1.0 - math.sqrt(0.98), abs=1e-12)
    assert res.mle_hellinger_risk > 0.3

    # closed pieces match an independent trapezoid oracle
    n = 100
    for theta in (0.05, 0.1, 0.37, 0.9):
        assert ex._birge_h_sq(theta, n) == pytest.approx(_direct_birge(theta, n), abs=1e-8)

    # the MLE exceeds 1/10 whenever an outlier is present
    rng = np.random.default_rng(0)
    for _ in range(50):
        pick = rng.random(n) < 2 / n
        x = np.where(pick, rng.uniform(0.1, 0.9, n), rng.uniform(0, 0.1, n))
        if pick.any():
            assert x.max() >= 0.1


def _direct_birge(theta, n):
    # independent trapezoid evaluation of the affinity, split at the
    # mixture breakpoint where the integrand jumps
    w1, w2 = 1 - 2 / n, 2 / n
    aff = 0.0
    pieces = [(0.0, min(theta, 0.1), w1 / 0.1)]
    if theta > 0.1:
        pieces.append((0.1, min(theta, 0.9), w2 / 0.8))
    for lo, hi, dens in pieces:
        xs = np.linspace(lo, hi, 100_001)
        aff += np.trapezoid(np.sqrt(dens / theta) * np.ones_like(xs), xs)
    return 1.0 - aff


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ex.ExperimentConfig(scenario="nope")
    with pytest.raises(ValueError):
        ex.ExperimentConfig(scenario=ex.GAUSSIAN, epsilon_grid=(1.2,))
    with pytest.raises(ValueError):
        ex.ExperimentConfig(scenario=ex.CSV)
