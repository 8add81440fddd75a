"""Consistency restoration for noisy tables."""
from __future__ import annotations

import numpy as np

from .domain import ZERO_MASS, ProbTable


def normalize_vector(a: np.ndarray) -> np.ndarray:
    """Clip negatives to zero and rescale to unit mass; uniform if nothing positive survives."""
    clipped = np.maximum(np.asarray(a, dtype=np.float64), 0.0)
    total = clipped.sum()
    if total < ZERO_MASS:
        return np.full(clipped.size, 1.0 / clipped.size)
    return clipped / total


def normalize(table: ProbTable) -> ProbTable:
    return ProbTable(table.scope, normalize_vector(table.values))


def simplex_projection(a: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto {b >= 0, sum(b) = 1}.

    Sorted-threshold method, O(m log m).
    """
    a = np.asarray(a, dtype=np.float64)
    # stable sort on -a keeps equal entries in index order
    u = a[np.argsort(-a, kind="stable")]
    css = np.cumsum(u) - 1.0
    rho = np.arange(1, a.size + 1)
    positive = u - css / rho > 0
    r = np.nonzero(positive)[0][-1]
    tau = css[r] / (r + 1)
    return np.maximum(a - tau, 0.0)


def l2_project(table: ProbTable) -> ProbTable:
    b = simplex_projection(table.values)
    # float round-off can leave the sum a few ulps from 1
    return ProbTable(table.scope, b / b.sum())
