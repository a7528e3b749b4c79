"""Greedy structure search: hill climbing with a TABU list and perturbed restarts.

Reachability is tracked with Python ints used as bitsets: ``anc[v]`` has bit
``u`` set iff ``u`` is a proper ancestor of ``v``.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import networkx as nx

from .core import Dag, Dataset, _topological, make_rng
from .errors import UsageError
from .scoring import DEFAULT_ESS, ScoreCache


class MoveKind(enum.IntEnum):
    ADD = 0
    DELETE = 1
    REVERSE = 2


class Move(NamedTuple):
    kind: MoveKind
    source: int
    target: int

    def inverse(self) -> "Move":
        if self.kind is MoveKind.ADD:
            return Move(MoveKind.DELETE, self.source, self.target)
        if self.kind is MoveKind.DELETE:
            return Move(MoveKind.ADD, self.source, self.target)
        return Move(MoveKind.REVERSE, self.target, self.source)

    def __repr__(self):
        arrow = {MoveKind.ADD: "add", MoveKind.DELETE: "delete", MoveKind.REVERSE: "reverse"}[self.kind]
        return f"Move({arrow} {self.source}->{self.target})"


@dataclass(frozen=True)
class Constraints:
    """Structural restrictions on the search space.

    ``(x, y)`` in ``required_orders``: y must not be an ancestor of x.
    ``(y, x)`` in ``forbidden_parents``: y may not be a parent of x.
    """

    required_orders: frozenset[tuple[int, int]] = frozenset()
    forbidden_parents: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "required_orders", frozenset(map(tuple, self.required_orders)))
        object.__setattr__(self, "forbidden_parents", frozenset(map(tuple, self.forbidden_parents)))
        for x, y in self.required_orders | self.forbidden_parents:
            if x == y:
                raise UsageError("constraint endpoints must differ")

    @property
    def empty(self) -> bool:
        return not self.required_orders and not self.forbidden_parents

    def check_acyclic(self, n: int) -> None:
        """Raise :class:`CycleError` if the required orders contain a cycle."""
        parents: list[list[int]] = [[] for _ in range(n)]
        for x, y in self.required_orders:
            if not (0 <= x < n and 0 <= y < n):
                raise UsageError(f"constraint index out of range for {n} variables")
            parents[y].append(x)
        _topological(parents)


NO_CONSTRAINTS = Constraints()


@dataclass(frozen=True)
class SearchConfig:
    ess: float = DEFAULT_ESS
    max_restarts: int = 10
    perturbation_size: int = 20
    tabu_length: int = 100
    max_parents: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.ess > 0:
            raise UsageError("ess must be positive")
        for name in ("max_restarts", "perturbation_size", "tabu_length"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be non-negative")
        if self.max_parents is not None and self.max_parents < 0:
            raise UsageError("max_parents must be non-negative")


def _reach(parents: Sequence[Iterable[int]]) -> tuple[list[int], list[int]]:
    n = len(parents)
    order = _topological([tuple(p) for p in parents])
    anc = [0] * n
    for v in order:
        bits = 0
        for p in parents[v]:
            bits |= anc[p] | (1 << p)
        anc[v] = bits
    desc = [0] * n
    children: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for p in parents[v]:
            children[p].append(v)
    for v in reversed(order):
        bits = 0
        for c in children[v]:
            bits |= desc[c] | (1 << c)
        desc[v] = bits
    return anc, desc


def _order_masks(constraints: Constraints, n: int) -> list[int]:
    # must_precede[y]: bits x with (x, y) required, i.e. y may never reach x
    masks = [0] * n
    for x, y in constraints.required_orders:
        masks[y] |= 1 << x
    return masks


def _violates(a_bits: int, d_bits: int, must_precede: list[int]) -> bool:
    """True if making every node in a_bits an ancestor of every node in d_bits breaks an order."""
    bits = a_bits
    merged = 0
    while bits:
        low = bits & -bits
        merged |= must_precede[low.bit_length() - 1]
        bits ^= low
    return bool(merged & d_bits)


def _legal(parents: list[set[int]], anc: list[int], desc: list[int], constraints: Constraints,
           max_parents: int | None, must_precede: list[int]) -> list[Move]:
    n = len(parents)
    forbidden = constraints.forbidden_parents
    has_orders = bool(constraints.required_orders)
    moves: list[Move] = []
    for s in range(n):
        a_bits = anc[s] | (1 << s)
        for t in range(n):
            if s == t or s in parents[t] or (anc[s] >> t) & 1:
                continue
            if (s, t) in forbidden:
                continue
            if max_parents is not None and len(parents[t]) >= max_parents:
                continue
            if has_orders and _violates(a_bits, desc[t] | (1 << t), must_precede):
                continue
            moves.append(Move(MoveKind.ADD, s, t))
    edges = sorted((s, t) for t in range(n) for s in parents[t])
    moves.extend(Move(MoveKind.DELETE, s, t) for s, t in edges)
    for s, t in edges:
        if (t, s) in forbidden:
            continue
        if max_parents is not None and len(parents[s]) >= max_parents:
            continue
        # another path s ~> t would close a cycle once t -> s is added
        if any((anc[p] >> s) & 1 for p in parents[t] if p != s):
            continue
        if has_orders:
            reduced = [set(p) for p in parents]
            reduced[t].discard(s)
            r_anc, r_desc = _reach(reduced)
            if _violates(r_anc[t] | (1 << t), r_desc[s] | (1 << s), must_precede):
                continue
        moves.append(Move(MoveKind.REVERSE, s, t))
    moves.sort()
    return moves


def legal_moves(dag: Dag, constraints: Constraints = NO_CONSTRAINTS,
                max_parents: int | None = None) -> list[Move]:
    """All single-arc changes that keep ``dag`` acyclic and within ``constraints``."""
    parents = [set(p) for p in dag.parents]
    anc, desc = _reach(dag.parents)
    return _legal(parents, anc, desc, constraints, max_parents, _order_masks(constraints, dag.n))


def _apply(parents: list[set[int]], move: Move) -> None:
    kind, s, t = move
    if kind is MoveKind.ADD:
        parents[t].add(s)
    elif kind is MoveKind.DELETE:
        parents[t].discard(s)
    else:
        parents[t].discard(s)
        parents[s].add(t)


def apply_move(dag: Dag, move: Move, constraints: Constraints = NO_CONSTRAINTS,
               max_parents: int | None = None) -> Dag:
    move = Move(MoveKind(move[0]), int(move[1]), int(move[2]))
    if move.source == move.target:
        raise UsageError("move endpoints must differ")
    if move not in legal_moves(dag, constraints, max_parents):
        raise UsageError(f"illegal move {move!r}")
    parents = [set(p) for p in dag.parents]
    _apply(parents, move)
    return Dag(dag.variables, [sorted(p) for p in parents])


def satisfies(dag: Dag, constraints: Constraints) -> bool:
    for y, x in constraints.forbidden_parents:
        if dag.has_edge(y, x):
            return False
    if constraints.required_orders:
        anc, _ = _reach(dag.parents)
        for x, y in constraints.required_orders:
            if (anc[x] >> y) & 1:
                return False
    return True


SearchCallback = Callable[[str, tuple, float], None]


def hill_climb(dataset: Dataset, config: SearchConfig = SearchConfig(),
               constraints: Constraints = NO_CONSTRAINTS,
               cache: ScoreCache | None = None,
               callback: SearchCallback | None = None) -> Dag:
    """Best structure found by greedy climbing with random-restart perturbations.

    Each climb applies the best-scoring non-TABU legal move while it improves
    the score. At a local maximum the incumbent is recorded, then
    ``perturbation_size`` uniformly random legal moves are applied and the
    climb restarts; this happens ``max_restarts`` times. ``callback`` (if
    given) sees ``("step" | "local_max" | "perturb", parent_sets, score)``.
    """
    if dataset.n_rows == 0:
        raise UsageError("cannot learn from an empty dataset")
    n = len(dataset.variables)
    constraints.check_acyclic(n)
    if cache is None:
        cache = ScoreCache(dataset, config.ess)
    fam = cache.family
    rng = make_rng(config.seed)
    must_precede = _order_masks(constraints, n)
    max_parents = config.max_parents

    parents: list[set[int]] = [set() for _ in range(n)]
    local = [fam(i, ()) for i in range(n)]
    anc, desc = _reach(parents)
    tabu: deque[Move] = deque(maxlen=config.tabu_length)

    def delta(move: Move) -> float:
        kind, s, t = move
        if kind is MoveKind.ADD:
            return fam(t, parents[t] | {s}) - local[t]
        if kind is MoveKind.DELETE:
            return fam(t, parents[t] - {s}) - local[t]
        return (fam(t, parents[t] - {s}) - local[t]) + (fam(s, parents[s] | {t}) - local[s])

    def commit(move: Move) -> None:
        nonlocal anc, desc
        _apply(parents, move)
        for v in {move.source, move.target}:
            local[v] = fam(v, parents[v])
        anc, desc = _reach(parents)

    def snapshot() -> tuple:
        return tuple(tuple(sorted(p)) for p in parents)

    best_score = float("-inf")
    best: tuple | None = None
    restarts = 0
    while True:
        while True:
            taboo = {m.inverse() for m in tabu}
            chosen, chosen_delta = None, 0.0
            for move in _legal(parents, anc, desc, constraints, max_parents, must_precede):
                if move in taboo:
                    continue
                d = delta(move)
                if d > chosen_delta:
                    chosen, chosen_delta = move, d
            if chosen is None:
                break
            commit(chosen)
            tabu.append(chosen)
            if callback:
                callback("step", snapshot(), sum(local))
        score = sum(local)
        if callback:
            callback("local_max", snapshot(), score)
        if score > best_score:
            best_score, best = score, snapshot()
        if restarts >= config.max_restarts:
            break
        for _ in range(config.perturbation_size):
            moves = _legal(parents, anc, desc, constraints, max_parents, must_precede)
            if not moves:
                break
            commit(moves[int(rng.integers(len(moves)))])
        if callback:
            callback("perturb", snapshot(), sum(local))
        restarts += 1
    return Dag(dataset.variables, best)


def learn_tree(dataset: Dataset, ess: float = DEFAULT_ESS, cache: ScoreCache | None = None) -> Dag:
    """Highest-scoring structure in which every variable has at most one parent.

    BDe gains are symmetric (``gain(y -> x) == gain(x -> y)``), so the optimum
    is a maximum-weight spanning forest over positive-gain pairs, oriented
    away from the lowest-index node of each tree.
    """
    if dataset.n_rows == 0:
        raise UsageError("cannot learn from an empty dataset")
    n = len(dataset.variables)
    if cache is None:
        cache = ScoreCache(dataset, ess)
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for i in range(n):
        base = cache.family(i, ())
        for j in range(i + 1, n):
            gain = cache.family(i, (j,)) - base
            if gain > 0:
                graph.add_edge(i, j, weight=gain)
    forest = nx.maximum_spanning_tree(graph, algorithm="kruskal")
    parents: list[tuple[int, ...]] = [()] * n
    for component in sorted(nx.connected_components(forest), key=min):
        root = min(component)
        for u, v in nx.bfs_edges(forest, root, sort_neighbors=sorted):
            parents[v] = (u,)
    return Dag(dataset.variables, parents)
