"""Equivalence classes of DAGs and their completed PDAG representation."""
from __future__ import annotations

from dataclasses import dataclass

from .core import Dag, Variable, topological_order
from .errors import UsageError


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph.

    ``undirected`` holds pairs ``(a, b)`` with ``a < b``.
    """

    variables: tuple[Variable, ...]
    directed: frozenset[tuple[int, int]]
    undirected: frozenset[tuple[int, int]]

    def __post_init__(self):
        for x, y in self.directed:
            if (min(x, y), max(x, y)) in self.undirected:
                raise UsageError(f"pair ({x}, {y}) is both directed and undirected")
        for a, b in self.undirected:
            if a >= b:
                raise UsageError("undirected pairs must be stored as (low, high)")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def skeleton(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(x, y), max(x, y)) for x, y in self.directed) | self.undirected


def skeleton(dag: Dag) -> frozenset[tuple[int, int]]:
    return frozenset((min(p, c), max(p, c)) for p, c in dag.edges)


def v_structures(dag: Dag) -> frozenset[tuple[int, int, int]]:
    """Triples ``(a, c, b)`` with ``a -> c <- b``, ``a < b`` and a, b non-adjacent."""
    out = set()
    for c, pa in enumerate(dag.parents):
        pa = sorted(pa)
        for i, a in enumerate(pa):
            for b in pa[i + 1:]:
                if not dag.has_edge(a, b) and not dag.has_edge(b, a):
                    out.add((a, c, b))
    return frozenset(out)


def order_edges(dag: Dag) -> list[tuple[int, int]]:
    """Chickering's total order over the edges of ``dag``.

    Repeatedly pick the lowest node (in topological order) that still has an
    unordered incoming edge, then its highest unordered parent.
    """
    rank = {v: i for i, v in enumerate(topological_order(dag))}
    ordered = []
    for y in sorted(range(dag.n), key=rank.__getitem__):
        for x in sorted(dag.parents[y], key=rank.__getitem__, reverse=True):
            ordered.append((x, y))
    return ordered


def dag_to_pdag(dag: Dag) -> Pdag:
    """Completed PDAG of the equivalence class of ``dag``.

    Implements the compelled/reversible edge labelling of Chickering (1995).
    """
    parents = [set(pa) for pa in dag.parents]
    label: dict[tuple[int, int], str] = {}
    edges = order_edges(dag)
    for x, y in edges:
        if (x, y) in label:
            continue
        done = False
        for w in parents[x]:
            if label.get((w, x)) != "compelled":
                continue
            if w not in parents[y]:
                # w -> x -> y with w, y non-adjacent forces every edge into y
                for z in parents[y]:
                    label[(z, y)] = "compelled"
                done = True
                break
            label[(w, y)] = "compelled"
        if done:
            continue
        if any(z != x and z not in parents[x] for z in parents[y]):
            mark = "compelled"
        else:
            mark = "reversible"
        for z in parents[y]:
            if (z, y) not in label:
                label[(z, y)] = mark
    directed = frozenset(e for e, lab in label.items() if lab == "compelled")
    undirected = frozenset((min(e), max(e)) for e, lab in label.items() if lab == "reversible")
    return Pdag(dag.variables, directed, undirected)


def is_equivalent(d1: Dag, d2: Dag) -> bool:
    if d1.names != d2.names:
        raise UsageError("structures are over different variable domains")
    return skeleton(d1) == skeleton(d2) and v_structures(d1) == v_structures(d2)


def pdag_ancestors(pdag: Pdag, x: int, through_undirected: bool = False) -> set[int]:
    """Nodes with a nonempty directed path into ``x``.

    With ``through_undirected`` set, undirected edges may be walked in either
    direction (a "possibly an ancestor" reading).
    """
    into: dict[int, set[int]] = {}
    for a, b in pdag.directed:
        into.setdefault(b, set()).add(a)
    if through_undirected:
        for a, b in pdag.undirected:
            into.setdefault(a, set()).add(b)
            into.setdefault(b, set()).add(a)
    seen: set[int] = set()
    stack = [x]
    while stack:
        v = stack.pop()
        for u in into.get(v, ()):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    seen.discard(x)
    return seen


def markov_neighbors(dag: Dag, x: int) -> set[int]:
    """Variables adjacent to ``x`` or sharing a child with it."""
    out = set(dag.parents[x])
    for c, pa in enumerate(dag.parents):
        if x in pa:
            out.add(c)
            out.update(pa)
    out.discard(x)
    return out
