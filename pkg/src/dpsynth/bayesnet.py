"""Bayesian-network structures over Boolean attributes, exact joints and sampling."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .domain import (
    Dataset,
    ProbTable,
    _dense_guard,
    cell_assignments,
    cell_index,
    conditional_rows,
    empirical_distribution,
    marginalize,
)
from .errors import DegreeViolation, EmptyDatasetError, StructureError, TopologyViolation
from .mechanism import NoiseSource


@dataclass(frozen=True)
class BayesNetStructure:
    """Parent sets ``parents[i]`` for nodes ``0..d-1`` with declared degree bound ``k``.

    Indices are 0-based. A valid structure only has edges from lower to
    higher indices, so index order is a topological order.
    """

    d: int
    parents: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(tuple(int(j) for j in p) for p in self.parents))

    def family(self, i: int) -> tuple[int, ...]:
        """Scope of node i's marginal: the node followed by its sorted parents."""
        return (i,) + tuple(sorted(self.parents[i]))

    @classmethod
    def from_json(cls, text: str) -> "BayesNetStructure":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StructureError(f"structure is not valid JSON: {exc}") from exc
        for key in ("d", "k", "parents"):
            if key not in obj:
                raise StructureError(f"structure is missing field {key!r}")
        parents = obj["parents"]
        if not isinstance(parents, list):
            raise StructureError("'parents' must be a list of lists")
        for i, p in enumerate(parents):
            if not isinstance(p, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in p):
                raise StructureError(f"node {i}: parent set must be a list of integers", node=i)
        return cls(int(obj["d"]), tuple(tuple(p) for p in parents), int(obj["k"]))

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "k": self.k, "parents": [list(p) for p in self.parents]})


def validate_structure(s: BayesNetStructure) -> BayesNetStructure:
    """Check the degree bound and that every parent precedes its child."""
    if s.d < 1:
        raise StructureError(f"d must be >= 1, got {s.d}")
    if s.k < 0:
        raise StructureError(f"k must be >= 0, got {s.k}")
    if len(s.parents) != s.d:
        raise StructureError(f"expected {s.d} parent sets, got {len(s.parents)}")
    for i, p in enumerate(s.parents):
        if len(set(p)) != len(p):
            raise StructureError(f"node {i}: repeated parent in {list(p)}", node=i)
        if len(p) > s.k:
            raise DegreeViolation(f"node {i}: {len(p)} parents exceed degree bound k={s.k}", node=i)
        for j in p:
            if j == i:
                raise TopologyViolation(f"node {i}: self edge {i} -> {i}", node=i)
            if j > i or j < 0:
                raise TopologyViolation(f"node {i}: edge {j} -> {i} violates index order", node=i)
    return s


def chain_structure(d: int, k: int = 1) -> BayesNetStructure:
    """Each node's parents are the ``k`` nodes immediately before it."""
    parents = tuple(tuple(range(max(0, i - k), i)) for i in range(d))
    return validate_structure(BayesNetStructure(d, parents, k))


def independent_structure(d: int) -> BayesNetStructure:
    return BayesNetStructure(d, tuple(() for _ in range(d)), 0)


def five_node_structure() -> BayesNetStructure:
    """The five-node degree-2 network: 1 -> 2, {1,2} -> 3, {2,3} -> 4, {3,4} -> 5 (0-based here)."""
    return validate_structure(BayesNetStructure(5, ((), (0,), (0, 1), (1, 2), (2, 3)), 2))


def greedy_structure(data: Dataset, k: int) -> BayesNetStructure:
    """Non-private greedy builder: each node takes up to k earlier parents maximizing mutual information."""
    parents = []
    for i in range(data.d):
        chosen: list[int] = []
        for _ in range(min(k, i)):
            best, best_mi = None, -np.inf
            for j in range(i):
                if j in chosen:
                    continue
                mi = _mutual_information(data, i, tuple(sorted(chosen + [j])))
                if mi > best_mi + 1e-12:
                    best, best_mi = j, mi
            chosen.append(best)
        parents.append(tuple(sorted(chosen)))
    return validate_structure(BayesNetStructure(data.d, tuple(parents), k))


def _mutual_information(data: Dataset, child: int, parents: tuple[int, ...]) -> float:
    joint = empirical_distribution(data, (child,) + parents).values.reshape(-1, 2)
    pc = joint.sum(axis=0, keepdims=True)
    pp = joint.sum(axis=1, keepdims=True)
    mask = joint > 0
    return float((joint[mask] * np.log(joint[mask] / (pp @ pc)[mask])).sum())


@dataclass(frozen=True)
class NoisyBayesNet:
    """A structure plus one consistent marginal per node, over ``structure.family(i)``."""

    structure: BayesNetStructure
    marginals: tuple[ProbTable, ...]

    def __post_init__(self):
        validate_structure(self.structure)
        marginals = tuple(self.marginals)
        if len(marginals) != self.structure.d:
            raise StructureError(f"expected {self.structure.d} marginals, got {len(marginals)}")
        for i, m in enumerate(marginals):
            if m.scope != self.structure.family(i):
                raise StructureError(
                    f"node {i}: marginal scope {m.scope} != {self.structure.family(i)}", node=i
                )
            if not m.consistent:
                raise StructureError(f"node {i}: marginal is not consistent", node=i)
        object.__setattr__(self, "marginals", marginals)

    @property
    def d(self) -> int:
        return self.structure.d

    def conditional_tables(self) -> list[np.ndarray]:
        return [conditional_rows(m) for m in self.marginals]


def joint_distribution(net: NoisyBayesNet) -> ProbTable:
    """Dense joint over all d attributes as the product of per-node conditionals."""
    d = net.d
    _dense_guard(d)
    cells = cell_assignments(d)
    joint = np.ones(1 << d)
    for i, rows in enumerate(net.conditional_tables()):
        par = list(net.structure.family(i)[1:])
        p_idx = cell_index(cells[:, par]) if par else np.zeros(1 << d, dtype=np.int64)
        joint *= rows[p_idx, cells[:, i]]
    # each row sums to 1, so the product does too up to rounding
    return ProbTable(tuple(range(d)), joint / joint.sum())


def sample(net: NoisyBayesNet, count: int, source: NoiseSource) -> Dataset:
    """Draw ``count`` records node by node in index order.

    One vector of ``count`` uniforms is consumed per node, in node order.
    """
    if count < 1:
        raise EmptyDatasetError(f"sample count must be >= 1, got {count}")
    out = np.zeros((count, net.d), dtype=np.uint8)
    for i, rows in enumerate(net.conditional_tables()):
        par = list(net.structure.family(i)[1:])
        p_idx = cell_index(out[:, par]) if par else np.zeros(count, dtype=np.int64)
        u = source.uniform(count)
        out[:, i] = u < rows[p_idx, 1]
    return Dataset(out)


def net_from_conditionals(structure: BayesNetStructure, p_one: Sequence[Sequence[float]]) -> NoisyBayesNet:
    """Build a net from P(x_i = 1 | parents = p) given per node as a list indexed by parent cell.

    Parent marginals are computed exactly from the implied joint, so the
    resulting family tables are the true marginals of that joint.
    """
    validate_structure(structure)
    d = structure.d
    cond = []
    for i in range(d):
        q = np.asarray(p_one[i], dtype=np.float64).reshape(-1)
        npar = len(structure.parents[i])
        if q.size != 1 << npar:
            raise StructureError(f"node {i}: need {1 << npar} conditional values, got {q.size}", node=i)
        cond.append(np.stack([1.0 - q, q], axis=1))
    _dense_guard(d)
    cells = cell_assignments(d)
    joint = np.ones(1 << d)
    for i in range(d):
        par = list(structure.family(i)[1:])
        p_idx = cell_index(cells[:, par]) if par else np.zeros(1 << d, dtype=np.int64)
        joint *= cond[i][p_idx, cells[:, i]]
    full = ProbTable(tuple(range(d)), joint / joint.sum())
    return fit_exact(structure, full)


def fit_exact(structure: BayesNetStructure, full: ProbTable) -> NoisyBayesNet:
    """Noise-free net whose family marginals are taken from a full joint table."""
    return NoisyBayesNet(structure, tuple(marginalize(full, structure.family(i)) for i in range(structure.d)))


def random_net(structure: BayesNetStructure, source: NoiseSource, low: float = 0.0, high: float = 1.0) -> NoisyBayesNet:
    """Net with conditionals P(x_i=1 | .) drawn uniformly from [low, high]."""
    p_one = [low + (high - low) * source.uniform(1 << len(p)) for p in structure.parents]
    return net_from_conditionals(structure, p_one)


def load_structure_file(path: str | Path) -> BayesNetStructure:
    return validate_structure(BayesNetStructure.from_json(Path(path).read_text()))
