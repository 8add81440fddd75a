"""Downstream utility of synthetic data through a scaled-hinge ERM task.

The last attribute of every record is the label (0/1 mapped to -1/+1); the
other attributes, optionally with a constant 1 appended, are the features.
The hinge loss is multiplied by ``1 / (1 + R sqrt(d))`` so that it stays in
[0, 1] on the whole radius-R ball.

All solvers work on the distinct records of a dataset weighted by their
multiplicity, which makes them exactly invariant to record order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Dataset, ProbTable, cell_assignments, empirical_distribution
from .errors import EmptyDatasetError, InvalidParameterError, InvalidScopeError
from .mechanism import NoiseSource

DEFAULT_ITERATIONS = 5000


@dataclass(frozen=True)
class ErmProblem:
    d: int
    radius: float = 1.0
    lam: float = 0.0
    intercept: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise InvalidParameterError("records need at least one feature and a label (d >= 2)")
        if not self.radius > 0:
            raise InvalidParameterError(f"radius must be positive, got {self.radius}")
        if self.lam < 0:
            raise InvalidParameterError(f"lambda must be nonnegative, got {self.lam}")

    @property
    def loss_scale(self) -> float:
        return 1.0 / (1.0 + self.radius * np.sqrt(self.d))

    @property
    def dim(self) -> int:
        return self.d - 1 + int(self.intercept)

    @property
    def lipschitz(self) -> float:
        return self.loss_scale * np.sqrt(self.d)

    def with_lambda(self, lam: float) -> "ErmProblem":
        return ErmProblem(self.d, self.radius, lam, self.intercept)

    def design(self, records: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix and +-1 labels for an array of records."""
        records = np.asarray(records, dtype=np.float64)
        u = records[:, :-1]
        if self.intercept:
            u = np.hstack([u, np.ones((u.shape[0], 1))])
        v = 2.0 * records[:, -1] - 1.0
        return u, v

    def losses(self, theta: np.ndarray, records: np.ndarray) -> np.ndarray:
        u, v = self.design(records)
        return self.loss_scale * np.maximum(0.0, 1.0 - v * (u @ theta))


@dataclass(frozen=True)
class ErmSolution:
    theta: np.ndarray
    objective: float
    iterations: int
    seed: int


@dataclass(frozen=True)
class _Weighted:
    """Distinct records with their multiplicities."""

    records: np.ndarray
    weights: np.ndarray
    n: int


def _compress(data: Dataset) -> _Weighted:
    rows, counts = np.unique(data.records, axis=0, return_counts=True)
    return _Weighted(rows, counts.astype(np.float64), data.n)


def project_ball(theta: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(theta)
    return theta if norm <= radius else theta * (radius / norm)


def _objective(problem: ErmProblem, theta, u, v, w, n) -> float:
    margins = 1.0 - v * (u @ theta)
    return float(problem.loss_scale * (w * np.maximum(margins, 0.0)).sum() / n + problem.lam * theta @ theta)


def erm_fit(problem: ErmProblem, data: Dataset, iterations: int = DEFAULT_ITERATIONS, seed: int = 0) -> ErmSolution:
    """Minimize mean scaled hinge + lam * ||theta||^2 over the radius-R ball.

    Full-batch projected subgradient descent from theta = 0 with step
    2R / (G sqrt(t)); returns the average of the second half of the iterates.
    The method is deterministic, ``seed`` is only recorded.
    """
    if data is None or data.n < 1:
        raise EmptyDatasetError("cannot fit on an empty dataset")
    if iterations < 1:
        raise InvalidParameterError("iterations must be >= 1")
    if data.d != problem.d:
        raise InvalidScopeError(f"dataset width {data.d} != problem width {problem.d}")
    comp = _compress(data)
    u, v = problem.design(comp.records)
    w, n = comp.weights, comp.n
    s0, lam, radius = problem.loss_scale, problem.lam, problem.radius
    g_bound = problem.lipschitz + 2.0 * lam * radius
    coef = -s0 * w * v / n

    theta = np.zeros(problem.dim)
    avg = np.zeros(problem.dim)
    start = iterations // 2
    for t in range(1, iterations + 1):
        active = (1.0 - v * (u @ theta)) > 0
        grad = (coef * active) @ u + 2.0 * lam * theta
        theta = project_ball(theta - (2.0 * radius / (g_bound * np.sqrt(t))) * grad, radius)
        if t > start:
            avg += theta
    theta = project_ball(avg / (iterations - start), radius)
    return ErmSolution(theta, _objective(problem, theta, u, v, w, n), iterations, seed)


def empirical_risk(theta: np.ndarray, data: Dataset, problem: ErmProblem) -> float:
    """Sum (not mean) of scaled losses over the dataset."""
    comp = _compress(data)
    return float(comp.weights @ problem.losses(np.asarray(theta, dtype=np.float64), comp.records))


def risk(theta: np.ndarray, dist: ProbTable, problem: ErmProblem) -> float:
    """Expected scaled loss under a distribution over all d attributes."""
    if dist.scope != tuple(range(problem.d)):
        raise InvalidScopeError(f"distribution scope {dist.scope} does not cover 0..{problem.d - 1}")
    return float(problem.losses(np.asarray(theta, dtype=np.float64), cell_assignments(problem.d)) @ dist.values)


def tv_utility_gap(theta: np.ndarray, p: ProbTable, q: ProbTable, problem: ErmProblem) -> float:
    if p.scope != q.scope:
        raise InvalidScopeError(f"scope mismatch: {p.scope} vs {q.scope}")
    return abs(risk(theta, p, problem) - risk(theta, q, problem))


@dataclass(frozen=True)
class UtilityReport:
    utility: float
    risk_real: float
    risk_syn: float
    real_fit: ErmSolution
    syn_fit: ErmSolution


def utility_report(
    real: Dataset,
    synthetic: Dataset,
    problem: ErmProblem,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> UtilityReport:
    if real.d != synthetic.d:
        raise InvalidScopeError(f"width mismatch: real d={real.d}, synthetic d={synthetic.d}")
    fit_real = erm_fit(problem, real, iterations, seed)
    fit_syn = erm_fit(problem, synthetic, iterations, seed)
    r_real = empirical_risk(fit_real.theta, real, problem)
    r_syn = empirical_risk(fit_syn.theta, real, problem)
    return UtilityReport(abs(r_real - r_syn) / real.n, r_real, r_syn, fit_real, fit_syn)


def utility_metric(
    real: Dataset,
    synthetic: Dataset,
    problem: ErmProblem,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> float:
    """(1/n) |R(theta_real) - R(theta_syn)| with both risks summed over the real data."""
    return utility_report(real, synthetic, problem, iterations, seed).utility


def _project_rows(theta: np.ndarray, radius: float) -> np.ndarray:
    norms = np.linalg.norm(theta, axis=-1, keepdims=True)
    return theta * np.minimum(1.0, radius / np.maximum(norms, 1e-300))


def _sup_signed_loss(problem, u, v, signed_w, n, starts, iterations) -> np.ndarray:
    """Best value found of (1/n) sum_c w[b, c] loss_c(theta) over the ball, per row b.

    ``signed_w`` has shape (B, C) and ``starts`` shape (B, S, dim); all B x S
    ascent paths advance together.
    """
    s0, radius = problem.loss_scale, problem.radius
    g_bound = problem.lipschitz * np.abs(signed_w).sum(axis=1) / n + 1e-300
    w = signed_w[:, None, :]
    theta = starts
    best = np.full(signed_w.shape[0], -np.inf)
    for t in range(1, iterations + 2):
        margins = 1.0 - v * (theta @ u.T)
        vals = s0 * (w * np.maximum(margins, 0.0)).sum(axis=-1) / n
        best = np.maximum(best, vals.max(axis=1))
        if t > iterations:
            break
        grad = (-s0 * w * v * (margins > 0) / n) @ u
        step = (2.0 * radius / (g_bound * np.sqrt(t)))[:, None, None]
        theta = _project_rows(theta + step * grad, radius)
    return best


def rademacher_estimate(
    data: Dataset,
    problem: ErmProblem,
    draws: int = 200,
    seed: int = 0,
    iterations: int = 200,
    restarts: int = 4,
    batch: int = 256,
) -> tuple[float, float]:
    """Monte Carlo empirical Rademacher complexity of the scaled loss class.

    For each sign vector the supremum over the ball is approached by
    projected subgradient ascent from the origin and ``restarts`` random
    boundary points, keeping the best value seen. Returns (mean, standard error).
    """
    if draws < 1:
        raise InvalidParameterError("draws must be >= 1")
    if data.d != problem.d:
        raise InvalidScopeError(f"dataset width {data.d} != problem width {problem.d}")
    source = NoiseSource(seed)
    # sign sums per distinct row replace per-record sums
    rows, inverse = np.unique(data.records, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n_rows = rows.shape[0]
    u, v = problem.design(rows)
    values = np.empty(draws)
    for lo in range(0, draws, batch):
        b = min(batch, draws - lo)
        sigma = np.where(source.uniform((b, data.n)) < 0.5, -1.0, 1.0)
        signed_w = np.stack([np.bincount(inverse, weights=s, minlength=n_rows) for s in sigma])
        z = source.uniform((b, restarts, problem.dim)) - 0.5
        z *= problem.radius / np.maximum(np.linalg.norm(z, axis=-1, keepdims=True), 1e-300)
        starts = np.concatenate([np.zeros((b, 1, problem.dim)), z], axis=1)
        values[lo:lo + b] = _sup_signed_loss(problem, u, v, signed_w, data.n, starts, iterations)
    stderr = float(values.std(ddof=1) / np.sqrt(draws)) if draws > 1 else float("nan")
    return float(values.mean()), stderr


def utility_bound_rhs(
    tv: float,
    rademacher: float,
    n_syn: int,
    delta: float,
    c_lambda: float = 0.0,
    c1: float = 2.0,
) -> float:
    """C(lam) + C1 * TV + 2 * Rademacher + sqrt(log(1/delta) / (2 n_syn))."""
    return c_lambda + c1 * tv + 2.0 * rademacher + np.sqrt(np.log(1.0 / delta) / (2.0 * n_syn))


def minimal_c1(utility: float, tv: float, rademacher: float, n_syn: int, delta: float, c_lambda: float = 0.0) -> float:
    """Smallest C1 >= 0 for which ``utility_bound_rhs`` reaches ``utility``.

    Infinite when the TV term is zero and the remaining terms fall short.
    """
    slack = utility - utility_bound_rhs(0.0, rademacher, n_syn, delta, c_lambda, 0.0)
    if slack <= 0:
        return 0.0
    return float(slack / tv) if tv > 0 else float("inf")


@dataclass
class Decomposition:
    """The seven risk differences that bound the utility, plus the utility itself."""

    utility: float
    terms: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.terms.values()))

    @property
    def c_lambda_proxy(self) -> float:
        return self.terms["iii"] + self.terms["vii"]


def utility_decomposition(
    real: Dataset,
    synthetic: Dataset,
    q: ProbTable,
    problem: ErmProblem,
    iterations: int = DEFAULT_ITERATIONS,
) -> Decomposition:
    """Split the utility of ``synthetic`` into seven measurable pieces.

    ``q`` is the generator's output distribution that ``synthetic`` was
    sampled from. Regularized fits use ``problem.lam``; the comparison fits
    use lambda = 0.
    """
    d = problem.d
    scope = tuple(range(d))
    p = empirical_distribution(real, scope)
    q_hat = empirical_distribution(synthetic, scope)
    plain = problem.with_lambda(0.0)
    th_hat = erm_fit(problem, real, iterations).theta
    th_syn = erm_fit(problem, synthetic, iterations).theta
    th_star = erm_fit(plain, real, iterations).theta
    th_star_syn = erm_fit(plain, synthetic, iterations).theta

    def r(theta, dist):
        return risk(theta, dist, problem)

    terms = {
        "i": abs(r(th_syn, p) - r(th_syn, q)),
        "ii": abs(r(th_syn, q) - r(th_syn, q_hat)),
        "iii": abs(r(th_syn, q_hat) - r(th_star_syn, q_hat)),
        "iv": abs(r(th_star_syn, q_hat) - r(th_star, q_hat)),
        "v": abs(r(th_star, q_hat) - r(th_star, q)),
        "vi": abs(r(th_star, q) - r(th_star, p)),
        "vii": abs(r(th_star, p) - r(th_hat, p)),
    }
    utility = abs(r(th_hat, p) - r(th_syn, p))
    return Decomposition(utility, terms)
