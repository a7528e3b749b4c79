"""Variables, DAGs, parameterized networks and datasets.

State values are integer indices into ``Variable.states`` everywhere; labels
only appear at the file boundary (see :mod:`bnboot.io`).

Randomness: every sampling routine takes an integer seed and builds a
``numpy.random.Generator`` (PCG64) from it. Per-replicate seeds come from
:func:`derive_seed`, which XORs the base seed with a BLAKE2b hash of the
replicate key, so the k-th replicate gets the same stream whether replicates
run serially or in parallel.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CycleError, UsageError

_SEED_MASK = (1 << 64) - 1


def derive_seed(seed: int, *key) -> int:
    """Seed for the replicate identified by ``key``: ``seed XOR hash(key)``."""
    digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, "little")) & _SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        if not self.name:
            raise UsageError("variable name must be non-empty")
        if len(self.states) < 2:
            raise UsageError(f"variable {self.name!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states):
            raise UsageError(f"variable {self.name!r} has duplicate state labels")

    @property
    def arity(self) -> int:
        return len(self.states)


def _check_domain(variables: Sequence[Variable]) -> tuple[Variable, ...]:
    variables = tuple(variables)
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise UsageError("variable names must be unique")
    return variables


def binary_variables(names: Iterable[str]) -> tuple[Variable, ...]:
    """Convenience constructor for a domain of binary variables."""
    return tuple(Variable(name, ("0", "1")) for name in names)


def _topological(parents: Sequence[Sequence[int]]) -> list[int]:
    n = len(parents)
    indegree = [len(p) for p in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for child, pa in enumerate(parents):
        for p in pa:
            children[p].append(child)
    ready = [i for i in range(n) if indegree[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) < n:
        raise CycleError(_find_cycle(parents, set(range(n)) - set(order)))
    return order


def _find_cycle(parents: Sequence[Sequence[int]], remaining: set[int]) -> list[int]:
    # Every node left after Kahn's algorithm has a parent that is also left,
    # so walking parents from any of them must revisit a node.
    v = min(remaining)
    seen: dict[int, int] = {}
    path = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = min(p for p in parents[v] if p in remaining)
    cycle = path[seen[v]:]
    cycle.reverse()
    return cycle + [cycle[0]]


class Dag:
    """A directed acyclic graph over an ordered variable domain.

    ``parents[i]`` keeps the order in which parents were given; this order
    fixes the row layout of conditional probability tables. Equality and
    hashing ignore it and compare parent *sets*.
    """

    __slots__ = ("variables", "parents", "_order", "_key")

    def __init__(self, variables: Sequence[Variable], parents: Sequence[Iterable[int]] | None = None):
        self.variables = _check_domain(variables)
        n = len(self.variables)
        if parents is None:
            parents = [()] * n
        parents = tuple(tuple(int(p) for p in pa) for pa in parents)
        if len(parents) != n:
            raise UsageError(f"expected {n} parent sets, got {len(parents)}")
        for child, pa in enumerate(parents):
            if len(set(pa)) != len(pa):
                raise UsageError(f"duplicate parent for variable {child}")
            for p in pa:
                if not 0 <= p < n:
                    raise UsageError(f"parent index {p} out of range")
                if p == child:
                    raise UsageError(f"variable {child} cannot be its own parent")
        self.parents = parents
        self._order = _topological(parents)
        self._key = tuple(tuple(sorted(pa)) for pa in parents)

    @classmethod
    def from_edges(cls, variables: Sequence[Variable], edges: Iterable[tuple[int, int]]) -> "Dag":
        parents: list[list[int]] = [[] for _ in variables]
        for p, c in edges:
            parents[c].append(p)
        return cls(variables, parents)

    @classmethod
    def empty(cls, variables: Sequence[Variable]) -> "Dag":
        return cls(variables)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def key(self) -> tuple[tuple[int, ...], ...]:
        """Canonical identity: sorted parent tuples."""
        return self._key

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, c) for c, pa in enumerate(self.parents) for p in pa)

    def has_edge(self, source: int, target: int) -> bool:
        return source in self.parents[target]

    def children(self, v: int) -> list[int]:
        return [c for c, pa in enumerate(self.parents) if v in pa]

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise UsageError(f"unknown variable {name!r}")

    def with_parents(self, child: int, parents: Iterable[int]) -> "Dag":
        new = list(self.parents)
        new[child] = tuple(parents)
        return Dag(self.variables, new)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self._key == other._key and self.names == other.names

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        names = self.names
        arcs = ", ".join(f"{names[p]}->{names[c]}" for p, c in self.edges)
        return f"Dag({arcs or 'empty'})"


def topological_order(dag: Dag) -> list[int]:
    """Parents-first order; ties go to the lowest variable index."""
    return list(dag._order)


def config_strides(arities: Sequence[int]) -> list[int]:
    """Row-major strides: the first parent varies slowest."""
    strides = [1] * len(arities)
    for j in range(len(arities) - 2, -1, -1):
        strides[j] = strides[j + 1] * arities[j + 1]
    return strides


class BayesianNetwork:
    """A DAG plus one conditional probability table per variable.

    ``cpts[i]`` has shape ``(q_i, r_i)``: one row per configuration of
    ``structure.parents[i]`` (row-major, first parent slowest) and one column
    per state of variable ``i``.
    """

    def __init__(self, structure: Dag, cpts: Sequence[np.ndarray]):
        self.structure = structure
        arities = [v.arity for v in structure.variables]
        if len(cpts) != structure.n:
            raise UsageError(f"expected {structure.n} tables, got {len(cpts)}")
        tables = []
        for i, table in enumerate(cpts):
            table = np.array(table, dtype=float)
            q = int(np.prod([arities[p] for p in structure.parents[i]], dtype=np.int64))
            if table.shape != (q, arities[i]):
                raise UsageError(
                    f"table for {structure.variables[i].name!r} has shape {table.shape}, "
                    f"expected {(q, arities[i])}"
                )
            if np.any(table < 0) or np.any(table > 1):
                raise UsageError(f"table for {structure.variables[i].name!r} has entries outside [0, 1]")
            if np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
                raise UsageError(f"rows of table for {structure.variables[i].name!r} do not sum to 1")
            table.setflags(write=False)
            tables.append(table)
        self.cpts = tuple(tables)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.structure.variables

    @property
    def n(self) -> int:
        return self.structure.n

    def parent_config(self, child: int, assignment: Sequence[int]) -> int:
        pa = self.structure.parents[child]
        arities = [self.variables[p].arity for p in pa]
        return sum(assignment[p] * s for p, s in zip(pa, config_strides(arities)))


class Dataset:
    """N complete rows of state indices over an ordered variable domain."""

    __slots__ = ("variables", "data")

    def __init__(self, variables: Sequence[Variable], rows):
        self.variables = _check_domain(variables)
        n = len(self.variables)
        data = np.array(rows, dtype=np.int64)
        if data.size == 0:
            data = data.reshape(0, n)
        if data.ndim != 2 or data.shape[1] != n:
            raise UsageError(f"rows must have {n} columns")
        for j, v in enumerate(self.variables):
            col = data[:, j]
            if col.size and (col.min() < 0 or col.max() >= v.arity):
                raise UsageError(f"state index out of range for variable {v.name!r}")
        data.setflags(write=False)
        self.data = data

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def __len__(self):
        return self.data.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.data]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.variables, self.data[np.asarray(indices, dtype=np.int64)])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"Dataset(N={self.n_rows}, variables={list(self.names)})"


def _check_assignment(bn: BayesianNetwork, assignment) -> tuple[int, ...]:
    assignment = tuple(int(x) for x in assignment)
    if len(assignment) != bn.n:
        raise UsageError(f"assignment has {len(assignment)} values, network has {bn.n} variables")
    for v, x in zip(bn.variables, assignment):
        if not 0 <= x < v.arity:
            raise UsageError(f"state {x} out of range for variable {v.name!r}")
    return assignment


def log_joint_probability(bn: BayesianNetwork, assignment) -> float:
    assignment = _check_assignment(bn, assignment)
    total = 0.0
    for i in range(bn.n):
        p = bn.cpts[i][bn.parent_config(i, assignment), assignment[i]]
        if p == 0.0:
            return -np.inf
        total += np.log(p)
    return float(total)


def joint_probability(bn: BayesianNetwork, assignment) -> float:
    """Probability of one full assignment (product of the local conditionals)."""
    return float(np.exp(log_joint_probability(bn, assignment)))


def _config_index(data: np.ndarray, parents: Sequence[int], arities: Sequence[int]) -> np.ndarray:
    idx = np.zeros(data.shape[0], dtype=np.int64)
    for p in parents:
        idx *= arities[p]
        idx += data[:, p]
    return idx


def row_log_probabilities(bn: BayesianNetwork, dataset: Dataset) -> np.ndarray:
    """Log-probability of every row; ``-inf`` where a row has probability 0."""
    if tuple(dataset.variables) != tuple(bn.variables):
        raise UsageError("dataset variables do not match the network")
    arities = [v.arity for v in bn.variables]
    data = dataset.data
    out = np.zeros(data.shape[0])
    with np.errstate(divide="ignore"):
        for i in range(bn.n):
            cfg = _config_index(data, bn.structure.parents[i], arities)
            out += np.log(bn.cpts[i][cfg, data[:, i]])
    return out


def forward_sample(bn: BayesianNetwork, count: int, seed: int) -> Dataset:
    """Draw ``count`` i.i.d. rows by ancestral sampling in topological order."""
    if count < 0:
        raise UsageError("count must be non-negative")
    rng = make_rng(seed)
    arities = [v.arity for v in bn.variables]
    data = np.zeros((count, bn.n), dtype=np.int64)
    for i in topological_order(bn.structure):
        cfg = _config_index(data, bn.structure.parents[i], arities)
        u = rng.random(count)
        # state = number of cumulative thresholds <= u; exact for 0/1 tables
        cum = np.cumsum(bn.cpts[i], axis=1)[:, :-1]
        states = (cum[cfg] <= u[:, None]).sum(axis=1)
        data[:, i] = np.minimum(states, arities[i] - 1)
    return Dataset(bn.variables, data)


def resample_with_replacement(dataset: Dataset, seed: int) -> Dataset:
    """Bootstrap resample: N rows drawn uniformly with replacement."""
    n = dataset.n_rows
    if n == 0:
        raise UsageError("cannot resample an empty dataset")
    idx = make_rng(seed).integers(0, n, size=n)
    return Dataset(dataset.variables, dataset.data[idx])


def test_log_loss(bn: BayesianNetwork, test: Dataset) -> float:
    """Average natural-log probability per test instance (may be ``-inf``)."""
    if test.n_rows == 0:
        raise UsageError("test set is empty")
    return float(np.mean(row_log_probabilities(bn, test)))


test_log_loss.__test__ = False  # keep pytest from collecting it
