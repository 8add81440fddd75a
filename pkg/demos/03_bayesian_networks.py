"""
Bayesian networks over Boolean attributes
=========================================

A network lists, for every attribute, at most k parents with smaller
indices. Its joint is the product of per-node conditionals.
"""

from dpsynth import (
    BayesNetStructure,
    NoiseSource,
    TopologyViolation,
    empirical_distribution,
    five_node_structure,
    joint_distribution,
    random_net,
    sample,
    tv_distance,
    validate_structure,
)

s = five_node_structure()
print("five-node example, parents:", s.parents, "degree", s.k)
print(s.to_json())

# parents must come earlier in the order
try:
    validate_structure(BayesNetStructure(3, ((), (2,), ()), 1))
except TopologyViolation as exc:
    print("rejected:", exc)

###############################################################################
# A random network on this structure, its exact joint and a sample.

net = random_net(s, NoiseSource(1), 0.1, 0.9)
joint = joint_distribution(net)
print("joint has", joint.values.size, "cells, mass", round(joint.values.sum(), 12))

for count in (1_000, 10_000, 100_000):
    data = sample(net, count, NoiseSource(count))
    emp = empirical_distribution(data, tuple(range(5)))
    print(f"{count:>7} samples: TV to exact joint {tv_distance(emp, joint):.4f}")
