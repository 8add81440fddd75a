"""Closed-form accuracy bounds, Monte Carlo verification and the packing adversary.

All logarithms are natural. Distances between distributions use the
no-half TV convention of :func:`dpsynth.domain.tv_distance`.
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .bayesnet import chain_structure, joint_distribution, random_net
from .domain import Dataset, ProbTable, empirical_distribution, l2_distance, tv_distance
from .errors import InfeasiblePackingError, InvalidParameterError
from .mechanism import NoiseSource, PrivacyParams, perturb_table
from .postprocess import l2_project, normalize
from .synthesizer import PostProcessKind, SourceDistribution, full_domain_laplace, privbayes_fit

Generator = Callable[[NoiseSource], ProbTable]
DatasetGenerator = Callable[[Dataset, NoiseSource], ProbTable]


class AssumptionWarning(UserWarning):
    """Parameters fall outside the regime a bound was derived for."""


def _check_positive(**kw) -> None:
    for name, value in kw.items():
        if not value > 0:
            raise InvalidParameterError(f"{name} must be positive, got {value}")


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")


def bound_tv_privbayes(n: float, d: int, k: int, epsilon: float, delta: float) -> float:
    """TV accuracy of normalized noisy-network synthesis: 12 d^2 4^k (k+1) / (n eps) * log(2d / delta)."""
    _check_positive(n=n, d=d, epsilon=epsilon)
    _check_delta(delta)
    if k < 0:
        raise InvalidParameterError(f"k must be >= 0, got {k}")
    return 12.0 * d**2 * 2.0 ** (2 * k) * (k + 1) / (n * epsilon) * math.log(2 * d / delta)


def bound_l2_privbayes(n: float, d: int, k: int, epsilon: float, delta: float) -> float:
    """L2 accuracy with simplex projection: 12 d^2 2^k (k+1) / (n eps) * log(2d / delta)."""
    _check_positive(n=n, d=d, epsilon=epsilon)
    _check_delta(delta)
    if k < 0:
        raise InvalidParameterError(f"k must be >= 0, got {k}")
    return 12.0 * d**2 * 2.0**k * (k + 1) / (n * epsilon) * math.log(2 * d / delta)


def bound_full_domain(n: float, d: int, epsilon: float, delta: float) -> float:
    """TV accuracy of Laplace noise on all 2^d cells: d 4^d / (n eps) * log(2 / delta)."""
    _check_positive(n=n, d=d, epsilon=epsilon)
    _check_delta(delta)
    return d * 2.0 ** (2 * d) / (n * epsilon) * math.log(2 / delta)


def bound_lower(n: float, epsilon: float, delta: float, domain_size: float) -> float:
    """Minimax TV lower bound log(delta |Omega|) / (n eps) for any eps-DP generator.

    Warns (does not raise) when ``d / eps << n << |Omega|`` is clearly
    violated, taking d = log2 |Omega|.
    """
    _check_positive(n=n, epsilon=epsilon, delta=delta, domain_size=domain_size)
    d = math.log2(domain_size)
    if not (d / epsilon < n < domain_size):
        warnings.warn(
            f"lower bound outside its regime: need d/eps={d / epsilon:.3g} < n={n} < |Omega|={domain_size:.3g}",
            AssumptionWarning,
            stacklevel=2,
        )
    return math.log(delta * domain_size) / (n * epsilon)


def bound_normalized_cells(m: int, n: float, d: int, epsilon: float, delta: float) -> float:
    """Max-cell error after noise + normalization: 3 m d / (n eps) * log(m / delta)."""
    _check_positive(m=m, n=n, d=d, epsilon=epsilon)
    _check_delta(delta)
    return 3.0 * m * d / (n * epsilon) * math.log(m / delta)


def bound_projected_cells(m: int, n: float, d: int, epsilon: float, delta: float) -> float:
    """L2 error after noise + simplex projection: sqrt(m) d / (n eps) * log(m / delta)."""
    _check_positive(m=m, n=n, d=d, epsilon=epsilon)
    _check_delta(delta)
    return math.sqrt(m) * d / (n * epsilon) * math.log(m / delta)


def bound_conditional(n: float, d: int, k: int, epsilon: float, delta: float, parent_mass: float) -> float:
    """Per-conditional error: 6 d 2^k (k+1) / (n eps) * log(2 / delta) / P(parents)."""
    _check_positive(n=n, d=d, epsilon=epsilon, parent_mass=parent_mass)
    _check_delta(delta)
    return 6.0 * d * 2.0**k * (k + 1) / (n * epsilon) * math.log(2 / delta) / parent_mass


def pass_threshold(delta: float, trials: int) -> float:
    """Minimum pass fraction: (1 - delta) minus three binomial standard deviations."""
    return (1.0 - delta) - 3.0 * math.sqrt(delta * (1.0 - delta) / trials)


@dataclass
class BoundReport:
    bound_name: str
    parameters: dict[str, Any]
    theoretical_value: float
    empirical_quantile: float | None = None
    trials: int = 0
    pass_fraction: float | None = None
    passed: bool | None = None
    seed: int | None = None
    distances: list[float] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.theoretical_value >= 0:
            raise InvalidParameterError(f"theoretical value must be >= 0, got {self.theoretical_value}")
        if self.pass_fraction is not None and not 0 <= self.pass_fraction <= 1:
            raise InvalidParameterError(f"pass fraction {self.pass_fraction} outside [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


DISTANCES: dict[str, Callable[[ProbTable, ProbTable], float]] = {
    "tv": tv_distance,
    "l2": l2_distance,
    "linf": lambda p, q: float(np.abs(p.values - q.values).max()),
}


def _run_trials(fn: Callable[[int], float], trials: int, threads: int) -> list[float]:
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def verify_bound(
    generator: Generator,
    reference: ProbTable,
    bound: float,
    trials: int,
    master_seed: int,
    delta: float,
    distance: str = "tv",
    name: str = "custom",
    parameters: dict[str, Any] | None = None,
    threads: int = 1,
) -> BoundReport:
    """Run ``generator`` on ``trials`` derived noise streams and compare distances to ``bound``.

    Trial t uses ``NoiseSource(master_seed).derive(1, t)``. PASS iff the
    fraction of trials within the bound reaches :func:`pass_threshold`.
    """
    if trials < 100:
        raise InvalidParameterError(f"need at least 100 trials, got {trials}")
    _check_delta(delta)
    dist_fn = DISTANCES[distance]
    master = NoiseSource(master_seed)

    def one(t: int) -> float:
        return dist_fn(generator(master.derive(1, t)), reference)

    dists = np.array(_run_trials(one, trials, threads))
    frac = float(np.mean(dists <= bound))
    threshold = pass_threshold(delta, trials)
    return BoundReport(
        bound_name=name,
        parameters=dict(parameters or {}, delta=delta, distance=distance),
        theoretical_value=float(bound),
        empirical_quantile=float(np.quantile(dists, 1.0 - delta)),
        trials=trials,
        pass_fraction=frac,
        passed=bool(frac >= threshold),
        seed=master_seed,
        distances=[float(x) for x in dists],
        extra={"pass_threshold": threshold, "median": float(np.median(dists))},
    )


@dataclass(frozen=True)
class BoundSetup:
    """A ready-to-run verification: generator, reference distribution, bound and metadata."""

    name: str
    generator: Generator
    reference: ProbTable
    bound: float
    distance: str
    parameters: dict[str, Any]


def bn_source(d: int, k: int, master_seed: int, low: float = 0.2, high: float = 0.8) -> ProbTable:
    """Exact joint of a random chain network; conditionals in [low, high].

    Drawn from ``NoiseSource(master_seed).derive(0)`` so it is shared by all
    trials of a run.
    """
    net = random_net(chain_structure(d, k), NoiseSource(master_seed).derive(0), low, high)
    return joint_distribution(net)


CONFIGS = ("network_tv", "network_l2", "full_domain_tv", "normalized_linf", "projected_l2")


def bound_setup(
    config: str,
    *,
    n: int,
    d: int,
    epsilon: float,
    delta: float,
    k: int = 1,
    m: int = 8,
    master_seed: int,
) -> BoundSetup:
    """Ready-made verification for one of :data:`CONFIGS`.

    The network and full-domain configs run on the exact joint of a random
    chain network of degree k; the cell-level configs perturb a random
    m-cell distribution with Lap(d / (n eps)).
    """
    params = {"n": n, "d": d, "epsilon": epsilon, "delta": delta}
    if config in ("network_tv", "network_l2"):
        joint = bn_source(d, k, master_seed)
        src = SourceDistribution.from_table(joint, n)
        structure = chain_structure(d, k)
        pp = PrivacyParams(epsilon, delta, n, d)
        post = PostProcessKind.NORMALIZATION if config == "network_tv" else PostProcessKind.L2_PROJECTION

        def gen(noise: NoiseSource) -> ProbTable:
            return joint_distribution(privbayes_fit(src, structure, pp, post, noise))

        if config == "network_tv":
            return BoundSetup(config, gen, joint, bound_tv_privbayes(n, d, k, epsilon, delta), "tv", dict(params, k=k))
        return BoundSetup(config, gen, joint, bound_l2_privbayes(n, d, k, epsilon, delta), "l2", dict(params, k=k))
    if config == "full_domain_tv":
        joint = bn_source(d, k, master_seed)
        src = SourceDistribution.from_table(joint, n)
        pp = PrivacyParams(epsilon, delta, n, d)

        def gen(noise: NoiseSource) -> ProbTable:
            return full_domain_laplace(src, pp, noise)

        return BoundSetup(config, gen, joint, bound_full_domain(n, d, epsilon, delta), "tv", params)
    if config in ("normalized_linf", "projected_l2"):
        if m < 2 or m & (m - 1):
            raise InvalidParameterError(f"m must be a power of two >= 2, got {m}")
        # Dirichlet(1, ..., 1) draw via normalized exponentials
        e = -np.log(NoiseSource(master_seed).derive(0).uniform(m))
        table = ProbTable(tuple(range(m.bit_length() - 1)), e / e.sum())
        scale = d / (n * epsilon)
        post = normalize if config == "normalized_linf" else l2_project

        def gen(noise: NoiseSource) -> ProbTable:
            return post(perturb_table(table, scale, noise))

        if config == "normalized_linf":
            return BoundSetup(config, gen, table, bound_normalized_cells(m, n, d, epsilon, delta), "linf", dict(params, m=m))
        return BoundSetup(config, gen, table, bound_projected_cells(m, n, d, epsilon, delta), "l2", dict(params, m=m))
    raise InvalidParameterError(f"unknown config {config!r}, expected one of {CONFIGS}")


def verify_config(
    config: str,
    *,
    n: int,
    d: int,
    epsilon: float,
    delta: float,
    trials: int,
    master_seed: int,
    k: int = 1,
    m: int = 8,
    bound_scale: float = 1.0,
    threads: int = 1,
) -> BoundReport:
    """:func:`verify_bound` on a :func:`bound_setup`; ``bound_scale`` < 1 gives a negative control."""
    setup = bound_setup(config, n=n, d=d, epsilon=epsilon, delta=delta, k=k, m=m, master_seed=master_seed)
    params = dict(setup.parameters, bound_scale=bound_scale)
    return verify_bound(
        setup.generator,
        setup.reference,
        setup.bound * bound_scale,
        trials,
        master_seed,
        delta,
        distance=setup.distance,
        name=setup.name,
        parameters=params,
        threads=threads,
    )


@dataclass(frozen=True)
class PackingFamily:
    """Datasets D_x = (n - alpha) copies of ``anchor`` followed by alpha copies of x."""

    anchor: int
    alpha: int
    probes: tuple[int, ...]
    n: int
    d: int

    def dataset(self, probe: int) -> Dataset:
        a, x = _bits(self.anchor, self.d), _bits(probe, self.d)
        records = np.vstack([np.repeat(a[None, :], self.n - self.alpha, axis=0), np.repeat(x[None, :], self.alpha, axis=0)])
        return Dataset(records)

    def distribution(self, probe: int) -> ProbTable:
        vals = np.zeros(1 << self.d)
        vals[self.anchor] = (self.n - self.alpha) / self.n
        vals[probe] = self.alpha / self.n
        return ProbTable(tuple(range(self.d)), vals)


def _bits(cell: int, d: int) -> np.ndarray:
    return ((cell >> np.arange(d)) & 1).astype(np.uint8)


def packing_alpha(n: int, epsilon: float, delta: float, domain_size: int) -> int:
    """ceil(log(delta |Omega|) / eps), at least 1; raises if it exceeds n."""
    raw = math.ceil(math.log(delta * domain_size) / epsilon)
    if raw > n:
        raise InfeasiblePackingError(f"alpha={raw} exceeds n={n}")
    return max(1, raw)


def build_packing_family(
    n: int, epsilon: float, delta: float, d: int, probes: int, source: NoiseSource, anchor: int = 0
) -> PackingFamily:
    """Pick ``probes`` distinct non-anchor cells uniformly and check the two packing facts."""
    size = 1 << d
    if not 1 <= probes <= size - 1:
        raise InvalidParameterError(f"probe count must lie in [1, {size - 1}], got {probes}")
    alpha = packing_alpha(n, epsilon, delta, size)
    keys = source.uniform(size)
    keys[anchor] = np.inf
    chosen = tuple(int(c) for c in np.sort(np.argsort(keys, kind="stable")[:probes]))
    family = PackingFamily(anchor, alpha, chosen, n, d)
    _check_packing(family)
    return family


def _check_packing(family: PackingFamily) -> None:
    ps = family.probes
    if len(ps) < 2:
        return
    for x, y in zip(ps, ps[1:] + ps[:1]):
        dx, dy = family.dataset(x).records, family.dataset(y).records
        differ = int(np.any(dx != dy, axis=1).sum())
        if differ != family.alpha:
            raise AssertionError(f"D_{x} and D_{y} differ in {differ} records, expected {family.alpha}")
        tv = tv_distance(family.distribution(x), family.distribution(y))
        if tv != 2 * family.alpha / family.n:
            raise AssertionError(f"TV(P_{x}, P_{y}) = {tv}, expected {2 * family.alpha / family.n}")


def laplace_generator(epsilon: float, delta: float) -> DatasetGenerator:
    def gen(data: Dataset, noise: NoiseSource) -> ProbTable:
        return full_domain_laplace(SourceDistribution.from_dataset(data), PrivacyParams(epsilon, delta, data.n, data.d), noise)

    return gen


def privbayes_generator(epsilon: float, delta: float, k: int = 1, post: str = "norm") -> DatasetGenerator:
    def gen(data: Dataset, noise: NoiseSource) -> ProbTable:
        net = privbayes_fit(
            SourceDistribution.from_dataset(data),
            chain_structure(data.d, k),
            PrivacyParams(epsilon, delta, data.n, data.d),
            post,
            noise,
        )
        return joint_distribution(net)

    return gen


def identity_generator(data: Dataset, noise: NoiseSource) -> ProbTable:
    """Non-private control returning the empirical distribution itself."""
    return empirical_distribution(data, tuple(range(data.d)))


def named_generator(name: str, epsilon: float, delta: float, k: int = 1) -> DatasetGenerator:
    if name == "laplace":
        return laplace_generator(epsilon, delta)
    if name == "privbayes":
        return privbayes_generator(epsilon, delta, k)
    if name == "identity":
        return identity_generator
    raise InvalidParameterError(f"unknown generator {name!r}")


def packing_adversary(
    generator: DatasetGenerator,
    n: int,
    epsilon: float,
    delta: float,
    d: int,
    probes: int,
    master_seed: int,
    repeats: int = 1,
    name: str = "packing",
    threads: int = 1,
) -> BoundReport:
    """Run ``generator`` on every packing dataset and measure TV to its empirical distribution.

    ``empirical_quantile`` holds the maximum observed TV, ``pass_fraction``
    the fraction of probes whose TV reached alpha / (2n), and ``passed``
    whether the maximum reaches the lower bound. Per-probe exceedance
    frequencies are compared with both the 1 - 2 delta and 1 - beta readings
    of the bound's probability.
    """
    size = 1 << d
    master = NoiseSource(master_seed)
    family = build_packing_family(n, epsilon, delta, d, probes, master.derive(0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AssumptionWarning)
        lower = bound_lower(n, epsilon, delta, size)
    threshold = family.alpha / (2 * n)

    def one(j: int) -> list[float]:
        x = family.probes[j]
        data, target = family.dataset(x), family.distribution(x)
        return [tv_distance(generator(data, master.derive(1, j, r)), target) for r in range(repeats)]

    per_probe = np.array(_run_trials(one, len(family.probes), threads))
    worst = per_probe.max(axis=1)
    beta = 2.0 * math.exp(epsilon * family.alpha) / size
    above_bound = (per_probe >= lower).mean(axis=1)
    return BoundReport(
        bound_name=name,
        parameters={"n": n, "d": d, "epsilon": epsilon, "delta": delta, "domain_size": size, "probes": probes, "repeats": repeats},
        theoretical_value=max(lower, 0.0),
        empirical_quantile=float(worst.max()),
        trials=int(per_probe.size),
        pass_fraction=float((worst >= threshold).mean()),
        passed=bool(worst.max() >= lower),
        seed=master_seed,
        distances=[float(x) for x in per_probe.reshape(-1)],
        extra={
            "alpha": family.alpha,
            "anchor": family.anchor,
            "probes": list(family.probes),
            "proof_threshold": threshold,
            "best_probe_frequency_above_bound": float(above_bound.max()),
            "reading_1_minus_2delta": 1.0 - 2.0 * delta,
            "reading_1_minus_beta": 1.0 - beta,
            "meets_1_minus_2delta": bool(above_bound.max() >= 1.0 - 2.0 * delta),
            "meets_1_minus_beta": bool(above_bound.max() >= 1.0 - beta),
        },
    )
