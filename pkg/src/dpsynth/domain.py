"""Datasets and dense probability tables over the Boolean domain {0,1}^d.

Cell indexing: for a table with scope ``(i1, ..., is)`` the assignment
``(x_i1, ..., x_is)`` lives at index ``sum_j x_ij * 2**j``, i.e. the first
scope attribute is the least-significant bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DenseGuardError, EmptyDatasetError, InvalidScopeError

MAX_DENSE_ATTRIBUTES = 25
CONSISTENCY_TOL = 1e-9
ZERO_MASS = 1e-12


@dataclass(frozen=True)
class Dataset:
    """An ordered multiset of Boolean records, stored as an ``(n, d)`` uint8 array."""

    records: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.records)
        if arr.ndim != 2:
            raise ValueError(f"records must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise EmptyDatasetError("dataset has no records")
        if arr.shape[1] < 1:
            raise ValueError("records must have at least one attribute")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("records must contain only 0/1 entries")
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "records", arr)

    @property
    def n(self) -> int:
        return self.records.shape[0]

    @property
    def d(self) -> int:
        return self.records.shape[1]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.records, other.records)

    __hash__ = None  # type: ignore[assignment]

    def cell_counts(self, scope: Sequence[int] | None = None) -> np.ndarray:
        """Histogram of records over the cells of ``scope`` (default: all attributes)."""
        scope = tuple(range(self.d)) if scope is None else _check_scope(scope, self.d)
        _dense_guard(len(scope))
        idx = cell_index(self.records[:, list(scope)])
        return np.bincount(idx, minlength=1 << len(scope))


@dataclass(frozen=True)
class ProbTable:
    """A dense real vector over the cells of a Boolean sub-domain.

    ``consistent`` marks tables that are valid distributions (nonnegative,
    unit mass); noisy intermediates carry ``consistent=False``.
    """

    scope: tuple[int, ...]
    values: np.ndarray
    consistent: bool = True

    def __post_init__(self):
        scope = tuple(int(i) for i in self.scope)
        if len(set(scope)) != len(scope) or any(i < 0 for i in scope):
            raise InvalidScopeError(f"invalid scope {scope}")
        _dense_guard(len(scope))
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.size != 1 << len(scope):
            raise ValueError(
                f"table over {len(scope)} attributes needs {1 << len(scope)} values, got {vals.size}"
            )
        if self.consistent and not is_consistent(vals):
            raise ValueError("table flagged consistent is not a probability distribution")
        vals.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def uniform(cls, scope: Sequence[int]) -> "ProbTable":
        m = 1 << len(scope)
        return cls(tuple(scope), np.full(m, 1.0 / m))

    @classmethod
    def point_mass(cls, scope: Sequence[int], assignment: Sequence[int]) -> "ProbTable":
        vals = np.zeros(1 << len(scope))
        vals[int(cell_index(np.asarray(assignment)[None, :])[0])] = 1.0
        return cls(tuple(scope), vals)

    def save(self, path: str | Path) -> None:
        """Write ``index,probability`` CSV plus a ``<path>.json`` sidecar holding the scope."""
        path = Path(path)
        lines = ["index,probability"]
        lines += [f"{i},{float(v)!r}" for i, v in enumerate(self.values)]
        path.write_text("\n".join(lines) + "\n")
        sidecar = {"scope": list(self.scope), "consistent": self.consistent}
        sidecar_path(path).write_text(json.dumps(sidecar))

    @classmethod
    def load(cls, path: str | Path) -> "ProbTable":
        path = Path(path)
        meta = json.loads(sidecar_path(path).read_text())
        rows = path.read_text().strip().splitlines()
        if not rows or rows[0].strip() != "index,probability":
            raise ValueError(f"{path}: expected header 'index,probability'")
        vals = np.empty(len(rows) - 1)
        for k, line in enumerate(rows[1:]):
            idx, prob = line.split(",")
            if int(idx) != k:
                raise ValueError(f"{path}: row {k + 1} has index {idx}, expected {k}")
            vals[k] = float(prob)
        return cls(tuple(meta["scope"]), vals, bool(meta.get("consistent", True)))


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def is_consistent(values: np.ndarray, tol: float = CONSISTENCY_TOL) -> bool:
    values = np.asarray(values)
    return bool(np.all(values >= 0) and abs(values.sum() - 1.0) <= tol)


def cell_index(assignments: np.ndarray) -> np.ndarray:
    """Map rows of a 0/1 matrix to cell indices (column j contributes ``2**j``)."""
    assignments = np.asarray(assignments, dtype=np.int64)
    weights = np.left_shift(1, np.arange(assignments.shape[-1], dtype=np.int64))
    return assignments @ weights


def cell_assignments(s: int) -> np.ndarray:
    """The ``(2**s, s)`` matrix whose row c is the assignment stored at cell c."""
    _dense_guard(s)
    cells = np.arange(1 << s, dtype=np.int64)[:, None]
    return ((cells >> np.arange(s)) & 1).astype(np.uint8)


def _dense_guard(s: int) -> None:
    if s > MAX_DENSE_ATTRIBUTES:
        raise DenseGuardError(f"dense table over {s} attributes exceeds the limit of {MAX_DENSE_ATTRIBUTES}")


def _check_scope(scope: Iterable[int], d: int) -> tuple[int, ...]:
    scope = tuple(int(i) for i in scope)
    if len(set(scope)) != len(scope):
        raise InvalidScopeError(f"duplicate attribute in scope {scope}")
    bad = [i for i in scope if not 0 <= i < d]
    if bad:
        raise InvalidScopeError(f"scope indices {bad} outside [0, {d})")
    return scope


def empirical_distribution(data: Dataset, scope: Sequence[int]) -> ProbTable:
    """Fraction of records falling in each cell of ``scope``."""
    scope = _check_scope(scope, data.d)
    counts = data.cell_counts(scope)
    return ProbTable(scope, counts / data.n)


def marginalize(table: ProbTable, keep: Sequence[int]) -> ProbTable:
    """Sum out every attribute of ``table`` not listed in ``keep``.

    The result's scope is ``keep`` in the order given.
    """
    keep = tuple(int(i) for i in keep)
    if len(set(keep)) != len(keep) or not set(keep) <= set(table.scope):
        raise InvalidScopeError(f"{keep} is not a subset of scope {table.scope}")
    s = len(table.scope)
    # Fortran order puts scope[j] on axis j.
    cube = table.values.reshape((2,) * s, order="F") if s else table.values
    axes = [table.scope.index(i) for i in keep]
    drop = tuple(a for a in range(s) if a not in axes)
    summed = cube.sum(axis=drop) if drop else cube
    remaining = [a for a in range(s) if a not in drop]
    order = [remaining.index(a) for a in axes]
    out = np.transpose(summed, order).reshape(-1, order="F") if keep else np.atleast_1d(summed)
    return ProbTable(keep, out, consistent=table.consistent)


def conditional_rows(table: ProbTable) -> np.ndarray:
    """All conditional rows of ``table`` at once, child = ``scope[0]``.

    Returns an array of shape ``(2**|parents|, 2)`` whose row p holds
    ``(P(x=0 | parents=p), P(x=1 | parents=p))``; parent configurations with
    mass below 1e-12 get the uniform row.
    """
    pairs = np.asarray(table.values).reshape(-1, 2)
    mass = pairs.sum(axis=1, keepdims=True)
    safe = mass >= ZERO_MASS
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(safe, pairs / np.where(safe, mass, 1.0), 0.5)
    return rows


def conditional(table: ProbTable, parent_assignment: Sequence[int]) -> ProbTable:
    """P(child | parents = parent_assignment) for a table over ``(child, *parents)``."""
    parent_assignment = np.asarray(parent_assignment, dtype=np.int64).reshape(-1)
    if parent_assignment.size != len(table.scope) - 1:
        raise InvalidScopeError(
            f"expected {len(table.scope) - 1} parent values, got {parent_assignment.size}"
        )
    if not np.all((parent_assignment == 0) | (parent_assignment == 1)):
        raise ValueError("parent assignment must be Boolean")
    p = int(cell_index(parent_assignment[None, :])[0]) if parent_assignment.size else 0
    row = conditional_rows(table)[p]
    return ProbTable((table.scope[0],), row)


def _same_scope(p: ProbTable, q: ProbTable) -> None:
    if p.scope != q.scope:
        raise InvalidScopeError(f"scope mismatch: {p.scope} vs {q.scope}")


def tv_distance(p: ProbTable, q: ProbTable) -> float:
    """Sum of absolute cell differences (no 1/2 factor; ranges over [0, 2])."""
    _same_scope(p, q)
    return float(np.abs(p.values - q.values).sum())


def l2_distance(p: ProbTable, q: ProbTable) -> float:
    _same_scope(p, q)
    return float(np.sqrt(np.square(p.values - q.values).sum()))
