"""
Long-run law: sampling, closed form, and certified approach
===========================================================

The drifted reflected Brownian motion with drift -1 and unit noise has
the exponential law with rate 2 as its long-run distribution.  Burn an
ensemble past the certified mixing horizon, compare it to the closed
form, and watch a fresh ensemble approach it at the certified rate.
"""

import numpy as np

from rjdlab import (
    EmpiricalDistribution,
    drifted_rbm,
    estimate_stationary,
    make_certificate,
    stationary_gap,
    wp_exact,
)

spec = drifted_rbm()
cert = make_certificate(spec)

# Burn in for 20/k time units (the default horizon shrinks the certified
# bound by e^-20) and keep the endpoint sample.
summary = estimate_stationary(spec, cert, burn_in=12.0, n_paths=20_000, h=5e-4, seed=1)
sample = EmpiricalDistribution.from_samples(summary.endpoint_sample)
target = EmpiricalDistribution.from_quantile_function(lambda u: -np.log1p(-u) / 2.0, 100_000)
print("W1(sample, Exp(2)) =", wp_exact(sample, target, 1.0))
print("mean               =", float(summary.endpoint_sample.mean()), "(closed form 0.5)")
print("exp-moment         =", summary.mean_V, "+-", summary.stderr_V, "(closed form 2)")

# A fresh ensemble started at x = 0 closes in on the sampled long-run law;
# the certificate bounds the distance at every snapshot.
curve, _ = stationary_gap(
    spec, cert, 0.0, [1.0, 2.0, 4.0, 8.0], n_paths=20_000, h=1e-3, seed=1, burn_in=12.0
)
print("\nt     distance      moment bound")
for i, t in enumerate(curve.times):
    print(f"{t:4.1f}  {curve.wp_marginal[i]:.6f}  {curve.bound1[i]:.6f}")

# The small residual distance at large t is the step-size bias of the
# projected Euler scheme (order sqrt(h)); halve h and it shrinks by ~1.4x.
