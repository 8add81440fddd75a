"""
Private synthetic data from noisy marginals
===========================================

Each node's family marginal is released with Laplace noise of scale
d / (n eps), repaired, and the resulting network is sampled. The baseline
adds noise to every cell of the full 2^d table instead.
"""

import numpy as np

from dpsynth import (
    NoiseSource,
    PrivacyParams,
    SourceDistribution,
    chain_structure,
    empirical_distribution,
    full_domain_laplace,
    joint_distribution,
    privbayes_fit,
    random_net,
    sample,
    synthesize_dataset,
    tv_distance,
)

d, n, eps = 8, 5_000, 1.0
truth = random_net(chain_structure(d, 1), NoiseSource(3), 0.1, 0.9)
real = sample(truth, n, NoiseSource(4))
source = SourceDistribution.from_dataset(real)
params = PrivacyParams(eps, 0.05, n, d)
print(f"per-marginal noise scale {params.per_marginal_scale:.2e}, full-domain scale {params.full_domain_scale:.2e}")

net = privbayes_fit(source, chain_structure(d, 1), params, "norm", NoiseSource(5))
synthetic = synthesize_dataset(net, n, NoiseSource(6))
print("first synthetic records:\n", synthetic.records[:3])

###############################################################################
# How far is each release from the real empirical distribution?

p_real = empirical_distribution(real, tuple(range(d)))
print(f"network release TV      {tv_distance(joint_distribution(net), p_real):.3f}")
print(f"full-domain release TV  {tv_distance(full_domain_laplace(source, params, NoiseSource(5)), p_real):.3f}")
print(f"synthetic sample TV     {tv_distance(empirical_distribution(synthetic, tuple(range(d))), p_real):.3f}")
print(f"network with no noise   {tv_distance(joint_distribution(privbayes_fit(source, chain_structure(d, 1), PrivacyParams(1e12, 0.05, n, d), 'norm', NoiseSource(0))), p_real):.3f}")

###############################################################################
# At this n the full-domain release wins: the real data is not exactly a
# chain, and that modelling bias dominates the network's TV. The noise part
# still shrinks with the budget, until only the bias is left.

for e in (0.1, 1.0, 10.0):
    pp = PrivacyParams(e, 0.05, n, d)
    tvs = [tv_distance(joint_distribution(privbayes_fit(source, chain_structure(d, 1), pp, "norm", NoiseSource(s))), p_real) for s in range(20)]
    print(f"eps={e:<5} median TV {np.median(tvs):.4f}")
