#!/usr/bin/env python3
"""Location estimation under contamination: mean, conjugate Bayes, and the
variational tempered-contrast posterior.

Data: (1-eps) N(0,1) + eps N(8,1).  The sample mean (and the conjugate
posterior mean, which shrinks it barely) absorbs the full eps * 8 shift;
the bounded-contrast fit saturates at the outliers and stays near zero.
A small replication table reproduces the qualitative picture; crank
`trials` up for figure-quality numbers.
"""

from rho_bayes.experiments import GAUSSIAN, ExperimentConfig, run_trials

config = ExperimentConfig(
    scenario=GAUSSIAN,
    n=200,
    epsilon_grid=(0.0, 0.05, 0.10),
    tau=0.5,
    trials=40,
    master_seed=7,
)
table = run_trials(config, jobs=2)

print(f"{'eps':>5} {'estimator':>10} {'risk':>10} {'rmse':>8} {'ci':>8}")
for row in table.rows:
    print(f"{row.epsilon:>5.2f} {row.estimator:>10} {row.posterior_risk:>10.4f} "
          f"{row.rmse:>8.4f} {row.ci_halfwidth:>8.4f}")

mle10 = table.get("mle", 0.10).rmse
rho10 = table.get("rho", 0.10).rmse
print(f"\nat eps=0.10 the contaminated mean shifts by about eps*8 = 0.8 "
      f"(measured RMSE {mle10:.3f}) while the robust fit sits at {rho10:.3f}")
