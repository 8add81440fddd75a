"""
Train on synthetic, test on real
================================

A scaled hinge-loss classifier is fit on real and on synthetic records; the
utility gap is the per-record difference of their risks on the real data.
"""

import numpy as np

from dpsynth import (
    ErmProblem,
    NoiseSource,
    PrivacyParams,
    SourceDistribution,
    chain_structure,
    empirical_distribution,
    joint_distribution,
    privbayes_fit,
    rademacher_estimate,
    random_net,
    sample,
    tv_distance,
    utility_metric,
)
from dpsynth.utility import minimal_c1, utility_bound_rhs

d = 5
problem = ErmProblem(d, radius=1.0)
truth = random_net(chain_structure(d, 1), NoiseSource(7), 0.1, 0.9)

for n in (500, 2000, 8000):
    us = []
    for s in range(10):
        real = sample(truth, n, NoiseSource(100 + s).derive(0))
        net = privbayes_fit(SourceDistribution.from_dataset(real), chain_structure(d, 1), PrivacyParams(1.0, 0.05, n, d), "norm", NoiseSource(100 + s).derive(1))
        syn = sample(net, n, NoiseSource(100 + s).derive(2))
        us.append(utility_metric(real, syn, problem))
    print(f"n={n:>5}: median utility gap {np.median(us):.2e}")

###############################################################################
# The gap is bounded by C1 * TV + 2 * Rademacher + a sampling term.

tv = tv_distance(joint_distribution(net), empirical_distribution(real, tuple(range(d))))
rad, se = rademacher_estimate(syn, problem, draws=100, seed=0)
u = us[-1]
print(f"TV {tv:.4f}, Rademacher {rad:.4f} +- {se:.4f}")
print(f"utility {u:.2e} <= bound {utility_bound_rhs(tv, rad, syn.n, 0.05):.4f}; smallest sufficient C1 {minimal_c1(u, tv, rad, syn.n, 0.05)}")
