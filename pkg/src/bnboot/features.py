"""Structural features: 0/1 functions of a network structure."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Dag
from .errors import UsageError
from .pdag import Pdag, dag_to_pdag, markov_neighbors, pdag_ancestors


class FeatureKind(enum.Enum):
    DIRECTED_EDGE = "directed_edge"
    UNDIRECTED_EDGE = "undirected_edge"
    MARKOV_NEIGHBOR = "markov_neighbor"
    ANCESTOR_ORDER = "ancestor_order"

    @property
    def ordered(self) -> bool:
        return self in (FeatureKind.DIRECTED_EDGE, FeatureKind.ANCESTOR_ORDER)

    @property
    def rank(self) -> int:
        return _KIND_RANK[self]

    @classmethod
    def parse(cls, text: str) -> "FeatureKind":
        key = text.strip().lower().replace("-", "_")
        if key in _ALIASES:
            return _ALIASES[key]
        try:
            return cls(key)
        except ValueError:
            raise UsageError(f"unknown feature kind {text!r}") from None


ALL_KINDS = tuple(FeatureKind)
_KIND_RANK = {k: i for i, k in enumerate(ALL_KINDS)}
_ALIASES = {
    "directed": FeatureKind.DIRECTED_EDGE,
    "undirected": FeatureKind.UNDIRECTED_EDGE,
    "markov": FeatureKind.MARKOV_NEIGHBOR,
    "mb": FeatureKind.MARKOV_NEIGHBOR,
    "order": FeatureKind.ANCESTOR_ORDER,
}


@dataclass(frozen=True)
class Feature:
    """A feature over variable indices; unordered kinds keep ``x < y``."""

    kind: FeatureKind
    x: int
    y: int

    def __post_init__(self):
        if self.x == self.y:
            raise UsageError("feature endpoints must differ")
        if not self.kind.ordered and self.x > self.y:
            a, b = self.y, self.x
            object.__setattr__(self, "x", a)
            object.__setattr__(self, "y", b)

    @property
    def sort_key(self):
        return (self.kind.rank, self.x, self.y)

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def text(self, names: Sequence[str]) -> str:
        x, y = names[self.x], names[self.y]
        if self.kind is FeatureKind.DIRECTED_EDGE:
            return f"edge {x} -> {y}"
        if self.kind is FeatureKind.UNDIRECTED_EDGE:
            return f"edge {x} -- {y}"
        if self.kind is FeatureKind.MARKOV_NEIGHBOR:
            return f"mb {x} -- {y}"
        return f"order {x} < {y}"


def parse_feature_text(text: str, names: Sequence[str]) -> Feature:
    index = {name: i for i, name in enumerate(names)}
    parts = text.split()
    try:
        head, x, op, y = parts
        patterns = {
            ("edge", "->"): FeatureKind.DIRECTED_EDGE,
            ("edge", "--"): FeatureKind.UNDIRECTED_EDGE,
            ("mb", "--"): FeatureKind.MARKOV_NEIGHBOR,
            ("order", "<"): FeatureKind.ANCESTOR_ORDER,
        }
        return Feature(patterns[(head, op)], index[x], index[y])
    except (ValueError, KeyError):
        raise UsageError(f"cannot parse feature {text!r}") from None


def _normalize_kinds(kinds) -> tuple[FeatureKind, ...]:
    if kinds is None:
        return ALL_KINDS
    if isinstance(kinds, (FeatureKind, str)):
        kinds = [kinds]
    out = {k if isinstance(k, FeatureKind) else FeatureKind.parse(k) for k in kinds}
    return tuple(sorted(out, key=lambda k: k.rank))


def _check_endpoints(feature: Feature, n: int) -> None:
    if not (0 <= feature.x < n and 0 <= feature.y < n):
        raise UsageError(f"feature endpoint out of range for {n} variables")


def evaluate_feature(feature: Feature, dag: Dag, pdag: Pdag | None = None) -> int:
    _check_endpoints(feature, dag.n)
    kind, x, y = feature.kind, feature.x, feature.y
    if kind is FeatureKind.MARKOV_NEIGHBOR:
        return int(y in markov_neighbors(dag, x))
    if pdag is None:
        pdag = dag_to_pdag(dag)
    if kind is FeatureKind.DIRECTED_EDGE:
        return int((x, y) in pdag.directed)
    if kind is FeatureKind.UNDIRECTED_EDGE:
        return int((x, y) in pdag.undirected)
    return int(x in pdag_ancestors(pdag, y))


def feature_universe(n_or_variables, kinds=None) -> list[Feature]:
    n = n_or_variables if isinstance(n_or_variables, int) else len(n_or_variables)
    out = []
    for kind in _normalize_kinds(kinds):
        for x in range(n):
            for y in range(n):
                if x == y or (not kind.ordered and x > y):
                    continue
                out.append(Feature(kind, x, y))
    return out


def universe_size(n: int, kind: FeatureKind) -> int:
    return n * (n - 1) if kind.ordered else n * (n - 1) // 2


def extract_features(dag: Dag, kinds=None, through_undirected: bool = False) -> frozenset[Feature]:
    """All features of the requested kinds that hold in ``dag``."""
    kinds = _normalize_kinds(kinds)
    out: set[Feature] = set()
    pdag = None
    if any(k is not FeatureKind.MARKOV_NEIGHBOR for k in kinds):
        pdag = dag_to_pdag(dag)
    for kind in kinds:
        if kind is FeatureKind.DIRECTED_EDGE:
            out.update(Feature(kind, a, b) for a, b in pdag.directed)
        elif kind is FeatureKind.UNDIRECTED_EDGE:
            out.update(Feature(kind, a, b) for a, b in pdag.undirected)
        elif kind is FeatureKind.MARKOV_NEIGHBOR:
            for x in range(dag.n):
                out.update(Feature(kind, x, y) for y in markov_neighbors(dag, x) if y > x)
        else:
            for y in range(dag.n):
                out.update(Feature(kind, x, y) for x in pdag_ancestors(pdag, y, through_undirected))
    return frozenset(out)


def sort_features(features: Iterable[Feature]) -> list[Feature]:
    return sorted(features, key=lambda f: f.sort_key)
