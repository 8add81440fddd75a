"""
Laplace noise and making noisy tables valid again
=================================================

Adding Laplace noise to a table breaks nonnegativity and unit mass. Two
repairs are available: clip-and-rescale, and Euclidean projection onto the
probability simplex.
"""

import numpy as np

from dpsynth import NoiseSource, ProbTable, l2_project, normalize, perturb_table

table = ProbTable((0, 1, 2), [0.40, 0.25, 0.15, 0.10, 0.05, 0.03, 0.01, 0.01])

# noise scale d / (n eps) for d=4 attributes, n=200 records, eps=0.5
scale = 4 / (200 * 0.5)
noisy = perturb_table(table, scale, NoiseSource(7))
print("noisy :", np.round(noisy.values, 3), " sum", round(noisy.values.sum(), 3))

norm = normalize(noisy)
proj = l2_project(noisy)
print("norm  :", np.round(norm.values, 3))
print("l2    :", np.round(proj.values, 3))

###############################################################################
# Both outputs are valid distributions. Their errors to the clean table:

for name, out in (("norm", norm), ("l2", proj)):
    err = out.values - table.values
    print(f"{name:5s} max |err| {np.abs(err).max():.4f}   L2 err {np.linalg.norm(err):.4f}")

###############################################################################
# Noise streams are reproducible: the same seed gives the same draws, and
# derived sub-streams do not depend on how much of the parent was used.

a = NoiseSource(7).laplace(1.0, 3)
b = NoiseSource(7).laplace(1.0, 3)
assert np.array_equal(a, b)
print("derived stream draw:", NoiseSource(7).derive(3).laplace(1.0, 1))
