import os

import pytest

from rho_bayes import experiments as ex

JOBS = min(2, len(os.sched_getaffinity(0)))

ACCEPT_SEED = 20250811


@pytest.fixture(scope="session")
def gaussian_table():
    cfg = ex.ExperimentConfig(
        scenario=ex.GAUSSIAN, n=200, epsilon_grid=(0.0, 0.05, 0.08, 0.10),
        tau=0.5, trials=200, master_seed=ACCEPT_SEED,
    )
    return ex.run_trials(cfg, jobs=JOBS)


@pytest.fixture(scope="session")
def poisson_clean_table():
    cfg = ex.ExperimentConfig(
        scenario=ex.POISSON, n=200, epsilon_grid=(0.0,), tau=0.5,
        trials=200, master_seed=ACCEPT_SEED + 1,
    )
    return ex.run_trials(cfg, jobs=JOBS)


@pytest.fixture(scope="session")
def fourier_table():
    cfg = ex.ExperimentConfig(
        scenario=ex.FOURIER, n=200, epsilon_grid=(0.10,), tau=0.5,
        trials=200, master_seed=ACCEPT_SEED + 2,
    )
    return ex.run_trials(cfg, jobs=JOBS)


@pytest.fixture(scope="session")
def correlated_table():
    cfg = ex.ExperimentConfig(
        scenario=ex.CORRELATED, n=100, epsilon_grid=(0.10,), tau=0.5,
        trials=100, master_seed=ACCEPT_SEED + 3,
    )
    return ex.run_trials(cfg, jobs=JOBS)
