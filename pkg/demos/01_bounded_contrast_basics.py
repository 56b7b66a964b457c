#!/usr/bin/env python3
"""The bounded ratio contrast and its link to Hellinger geometry.

The library replaces the log-likelihood ratio with psi(ratio) =
(sqrt(r)-1)/(sqrt(r)+1) = tanh(log(r)/4): bounded in [-1,1], antisymmetric
under swapping the two models, and sandwiched between squared Hellinger
distances.  This script walks through those facts numerically.
"""

import numpy as np

from rho_bayes import psi, psi_of_log_ratio
from rho_bayes.contrast import population_contrast_mc
from rho_bayes.hellinger import hellinger_sq_closed
from rho_bayes.models import GaussianLocationModel

print("psi at a few ratios:")
for r in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, np.inf):
    print(f"  psi({r!r:>6}) = {psi(r):+.6f}")

print("\nantisymmetry psi(1/x) = -psi(x):")
for x in (0.1, 0.5, 3.0, 42.0):
    print(f"  x={x:>5}: psi(1/x) + psi(x) = {psi(1/x) + psi(x):+.2e}")

print("\ntanh identity |psi(e^u) - tanh(u/4)|:")
for u in (-8.0, -1.0, 0.3, 5.0):
    print(f"  u={u:+.1f}: gap = {abs(psi(np.exp(u)) - psi_of_log_ratio(u)):.2e}")

# Population contrast between two location models under a third data law,
# compared with its Hellinger bracket: with a0 = 4, a1 = 3/8,
#   a1 H2(star,theta) - a0 H2(star,theta') <= R <= a0 H2(star,theta) - a1 H2(star,theta')
model = GaussianLocationModel()
mu_star, theta, theta_p = 0.3, -0.5, 1.1
law = lambda rng, size: rng.normal(mu_star, 1.0, size)
est = population_contrast_mc(model, [theta], [theta_p], law, n_draws=400_000, seed=1)
h_t = hellinger_sq_closed(model, [mu_star], [theta]).h_sq
h_p = hellinger_sq_closed(model, [mu_star], [theta_p]).h_sq
print(f"\npopulation contrast R(theta={theta}, theta'={theta_p}) under N({mu_star},1):")
print(f"  MC estimate     {est.value:+.5f} +- {est.std_error:.5f}")
print(f"  Hellinger bracket [{0.375*h_t - 4*h_p:+.5f}, {4*h_t - 0.375*h_p:+.5f}]")
