"""
Boolean tables, marginals and distances
=======================================

Records are rows of 0/1 values. A table over a scope of s attributes is a
dense vector of 2^s probabilities, indexed so that the first attribute of
the scope is the least significant bit.
"""

import numpy as np

from dpsynth import Dataset, ProbTable, conditional, empirical_distribution, l2_distance, marginalize, tv_distance

rng = np.random.default_rng(0)

# 200 records over 4 attributes; attribute 1 copies attribute 0 most of the time
x0 = rng.random(200) < 0.3
x1 = np.where(rng.random(200) < 0.9, x0, ~x0)
rest = rng.random((200, 2)) < 0.5
data = Dataset(np.column_stack([x0, x1, rest]).astype(np.uint8))
print(f"n={data.n} records, d={data.d} attributes")

###############################################################################
# The empirical distribution over a scope, and a marginal of it.

joint = empirical_distribution(data, (0, 1, 2, 3))
pair = marginalize(joint, (0, 1))
print("P(x0, x1) cells (00, 10, 01, 11):", np.round(pair.values, 3))

# marginalizing the joint equals counting directly
assert np.allclose(pair.values, empirical_distribution(data, (0, 1)).values)

###############################################################################
# Conditionals: P(x0 | x1 = 1). Scope order is (child, parent).

print("P(x0 | x1=1):", np.round(conditional(marginalize(joint, (0, 1)), (1,)).values, 3))

###############################################################################
# TV here is the plain sum of absolute differences, so it ranges over [0, 2].

uniform = np.full(16, 1 / 16)
flat = ProbTable((0, 1, 2, 3), uniform)
print(f"TV(joint, uniform) = {tv_distance(joint, flat):.3f}")
print(f"L2(joint, uniform) = {l2_distance(joint, flat):.3f}")
