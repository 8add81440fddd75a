"""Laplace noise, seeded noise streams and per-marginal budget splitting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ProbTable
from .errors import InvalidParameterError

DEFAULT_SEED = 20230501

_OPEN_UNIT_BITS = 53


@dataclass(frozen=True)
class PrivacyParams:
    """Budget and bookkeeping for one run.

    ``replacement_sensitivity`` switches the per-marginal sensitivity from
    1/n (used by the analysed mechanism) to 2/n, the L1 sensitivity of a full
    marginal vector when one record is replaced.
    """

    epsilon: float
    delta_fail: float
    n: int
    d: int
    replacement_sensitivity: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta_fail < 1:
            raise InvalidParameterError(f"delta_fail must lie in (0, 1), got {self.delta_fail}")
        if self.n < 1 or self.d < 1:
            raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")

    @property
    def sensitivity(self) -> float:
        return (2.0 if self.replacement_sensitivity else 1.0) * sensitivity_of_marginal(self.n)

    @property
    def per_marginal_epsilon(self) -> float:
        """Uniform split of the total budget across the d marginals."""
        return self.epsilon / self.d

    @property
    def per_marginal_scale(self) -> float:
        # d / (n * epsilon) with the default sensitivity
        return self.sensitivity / self.per_marginal_epsilon

    @property
    def full_domain_scale(self) -> float:
        return self.sensitivity / self.epsilon


class NoiseSource:
    """Seeded, single-owner stream of uniforms and Laplace draws.

    Children for parallel trials come from :meth:`derive`, which depends only
    on the master seed and the child key, never on how much of the parent
    stream has been consumed.
    """

    def __init__(self, seed: int = DEFAULT_SEED, key: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key)))
        self.counter = 0

    def __repr__(self) -> str:
        return f"NoiseSource(seed={self.seed}, key={self.key}, counter={self.counter})"

    def derive(self, *key: int) -> "NoiseSource":
        return NoiseSource(self.seed, self.key + tuple(key))

    def uniform(self, size=None) -> np.ndarray | float:
        """Draws from the open interval (0, 1)."""
        count = 1 if size is None else int(np.prod(size))
        self.counter += count
        ints = self._rng.integers(1, 1 << _OPEN_UNIT_BITS, size=size, dtype=np.int64)
        return ints / float(1 << _OPEN_UNIT_BITS)

    def laplace(self, scale: float, size=None) -> np.ndarray | float:
        """Inverse-CDF Laplace draws, see :func:`laplace_from_uniform`."""
        _check_scale(scale)
        u = self.uniform(size) - 0.5
        return laplace_from_uniform(u, scale)


def _check_scale(scale: float) -> None:
    if not scale > 0 or not np.isfinite(scale):
        raise InvalidParameterError(f"Laplace scale must be positive and finite, got {scale}")


def laplace_from_uniform(u, scale: float):
    """Map u ~ Uniform(-1/2, 1/2) to Lap(scale): ``-scale * sign(u) * ln(1 - 2|u|)``."""
    u = np.asarray(u, dtype=np.float64)
    out = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    return float(out) if out.ndim == 0 else out


def laplace_density(x, scale: float):
    _check_scale(scale)
    return np.exp(-np.abs(x) / scale) / (2.0 * scale)


def laplace_log_density(x, scale: float):
    _check_scale(scale)
    return -np.abs(x) / scale - np.log(2.0 * scale)


def sample_laplace(source: NoiseSource, scale: float) -> float:
    return source.laplace(scale)


def perturb_table(table: ProbTable, scale: float, source: NoiseSource) -> ProbTable:
    """Add i.i.d. Lap(scale) to every cell; the result is flagged inconsistent."""
    noise = source.laplace(scale, size=table.size)
    return ProbTable(table.scope, table.values + noise, consistent=False)


def sensitivity_of_marginal(n: int) -> float:
    """Per-cell sensitivity 1/n of an empirical marginal over n records."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return 1.0 / n
