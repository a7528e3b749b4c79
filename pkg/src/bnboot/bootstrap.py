"""Bootstrap confidence in structural features, and constraints derived from it."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .core import Dag, Dataset, derive_seed, forward_sample, make_rng, resample_with_replacement
from .errors import UsageError
from .features import ALL_KINDS, Feature, FeatureKind, _normalize_kinds, extract_features, sort_features
from .scoring import ScoreCache, fit_parameters, network_score
from .search import Constraints, SearchConfig, hill_climb, learn_tree

METHODS = ("nonparametric", "parametric", "bayesian_weighted")
_METHOD_ALIASES = {"np": "nonparametric", "p": "parametric", "bayes": "bayesian_weighted"}
LEARNERS = ("hill_climb", "tree")


def parse_method(text: str) -> str:
    method = _METHOD_ALIASES.get(text, text)
    if method not in METHODS:
        raise UsageError(f"unknown bootstrap method {text!r}")
    return method


@dataclass(frozen=True)
class BootstrapConfig:
    m: int = 100
    method: str = "nonparametric"
    search: SearchConfig = SearchConfig()
    kinds: tuple[FeatureKind, ...] = ALL_KINDS
    seed: int = 0
    learner: str = "hill_climb"
    jobs: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise UsageError("m must be at least 1")
        object.__setattr__(self, "method", parse_method(self.method))
        object.__setattr__(self, "kinds", _normalize_kinds(self.kinds))
        if self.learner not in LEARNERS:
            raise UsageError(f"unknown learner {self.learner!r}")
        if self.jobs < 1:
            raise UsageError("jobs must be at least 1")


@dataclass
class ConfidenceReport:
    """Per-feature confidence; features not stored have confidence 0."""

    method: str
    m: int | None
    names: tuple[str, ...]
    kinds: tuple[FeatureKind, ...]
    confidences: dict[Feature, float]
    scores: list[float] | None = None
    weights: list[float] | None = None
    structures: list[Dag] | None = field(default=None, repr=False)

    def confidence(self, feature: Feature) -> float:
        return self.confidences.get(feature, 0.0)

    def __getitem__(self, feature: Feature) -> float:
        return self.confidence(feature)

    def items(self) -> list[tuple[Feature, float]]:
        return [(f, self.confidences[f]) for f in sort_features(self.confidences)]


def learn_structure(dataset: Dataset, search: SearchConfig, learner: str = "hill_climb",
                    constraints: Constraints = Constraints()) -> Dag:
    if learner == "tree":
        if not constraints.empty:
            raise UsageError("the tree learner does not accept constraints")
        return learn_tree(dataset, search.ess)
    return hill_climb(dataset, search, constraints)


def _replicate(task) -> tuple:
    # top-level so it pickles for the process pool
    dataset, config, i = task
    rng = make_rng(derive_seed(config.seed, "replicate", i))
    source = getattr(config, "source", None)
    if source is None:
        sample = resample_with_replacement(dataset, int(rng.integers(2**63)))
    else:
        sample = forward_sample(source, dataset.n_rows, int(rng.integers(2**63)))
    search = SearchConfig(**{**config.search.__dict__, "seed": int(rng.integers(2**63))})
    return learn_structure(sample, search, config.learner).key


@dataclass(frozen=True)
class _ReplicateSource:
    """Picklable bundle of what a parametric replicate needs."""

    search: SearchConfig
    learner: str
    seed: int
    source: object


def _run_replicates(dataset: Dataset, config, m: int, jobs: int) -> list[Dag]:
    tasks = [(dataset, config, i) for i in range(m)]
    if jobs > 1 and m > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            keys = list(pool.map(_replicate, tasks, chunksize=max(1, m // (4 * jobs))))
    else:
        keys = [_replicate(t) for t in tasks]
    return [Dag(dataset.variables, key) for key in keys]


def _average(structures: Sequence[Dag], weights: Sequence[float], kinds) -> dict[Feature, float]:
    conf: dict[Feature, float] = {}
    for dag, w in zip(structures, weights):
        for f in extract_features(dag, kinds):
            conf[f] = conf.get(f, 0.0) + w
    return {f: min(1.0, v) for f, v in conf.items() if v > 0}


def _frequency(structures: Sequence[Dag], kinds) -> dict[Feature, float]:
    m = len(structures)
    counts: dict[Feature, int] = {}
    for dag in structures:
        for f in extract_features(dag, kinds):
            counts[f] = counts.get(f, 0) + 1
    # count / m keeps every value an exact multiple of 1/m
    return {f: c / m for f, c in counts.items()}


def _check_dataset(dataset: Dataset) -> None:
    if dataset.n_rows == 0:
        raise UsageError("bootstrap needs a non-empty dataset")


def nonparametric_bootstrap(dataset: Dataset, config: BootstrapConfig = BootstrapConfig()) -> ConfidenceReport:
    """Fraction of structures learned from resampled datasets that have each feature."""
    _check_dataset(dataset)
    structures = _run_replicates(dataset, config, config.m, config.jobs)
    return ConfidenceReport("nonparametric", config.m, dataset.names, config.kinds,
                            _frequency(structures, config.kinds), structures=structures)


def parametric_bootstrap(dataset: Dataset, config: BootstrapConfig = BootstrapConfig()) -> ConfidenceReport:
    """Fraction of structures learned from datasets sampled out of a fitted network."""
    _check_dataset(dataset)
    base = learn_structure(dataset, config.search, config.learner)
    source = fit_parameters(base, dataset, config.search.ess)
    rep = _ReplicateSource(config.search, config.learner, config.seed, source)
    structures = _run_replicates(dataset, rep, config.m, config.jobs)
    return ConfidenceReport("parametric", config.m, dataset.names, config.kinds,
                            _frequency(structures, config.kinds), structures=structures)


def posterior_weights(log_scores: Sequence[float]) -> np.ndarray:
    """Normalized ``exp(score)`` weights, computed stably."""
    s = np.asarray(log_scores, dtype=float)
    if s.size == 0:
        return s
    # shift by the max rather than logsumexp: with large |scores| the
    # subtraction s - logsumexp(s) loses ~1e-10 and the sum drifts off 1
    w = np.exp(s - s.max())
    return w / w.sum()


def bayesian_weighted_confidence(dataset: Dataset, config: BootstrapConfig = BootstrapConfig()) -> ConfidenceReport:
    """Non-parametric bootstrap structures reweighted by their posterior on ``dataset``.

    Repeated structures are counted once, so each distinct DAG enters the
    average with weight proportional to ``exp(BDe score)`` alone.
    """
    _check_dataset(dataset)
    structures = _run_replicates(dataset, config, config.m, config.jobs)
    distinct = list(dict.fromkeys(structures))
    cache = ScoreCache(dataset, config.search.ess)
    scores = [network_score(g, dataset, config.search.ess, cache) for g in distinct]
    weights = posterior_weights(scores)
    return ConfidenceReport("bayesian_weighted", config.m, dataset.names, config.kinds,
                            _average(distinct, weights, config.kinds),
                            scores=scores, weights=[float(w) for w in weights], structures=distinct)


def run_bootstrap(dataset: Dataset, config: BootstrapConfig = BootstrapConfig()) -> ConfidenceReport:
    runner = {
        "nonparametric": nonparametric_bootstrap,
        "parametric": parametric_bootstrap,
        "bayesian_weighted": bayesian_weighted_confidence,
    }[config.method]
    return runner(dataset, config)


@dataclass(frozen=True)
class DerivedConstraints:
    constraints: Constraints
    dropped: tuple[tuple[int, int, float], ...] = ()


def derive_constraints(report: ConfidenceReport, order_threshold: float = 0.8,
                       markov_threshold: float = 0.05) -> DerivedConstraints:
    """Orders above ``order_threshold`` become required; Markov-neighbor
    confidence below ``markov_threshold`` forbids the arc in both directions.

    Both comparisons are strict. Cyclic order sets are repaired by dropping
    the least confident order lying on a cycle until none remains.
    """
    n = len(report.names)
    orders = {}
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            c = report.confidence(Feature(FeatureKind.ANCESTOR_ORDER, x, y))
            if c > order_threshold:
                orders[(x, y)] = c
    forbidden = set()
    for x in range(n):
        for y in range(x + 1, n):
            if report.confidence(Feature(FeatureKind.MARKOV_NEIGHBOR, x, y)) < markov_threshold:
                forbidden.update({(x, y), (y, x)})
    dropped = []
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(orders)
    while True:
        cyclic = [(x, y) for comp in nx.strongly_connected_components(graph) if len(comp) > 1
                  for x, y in graph.subgraph(comp).edges]
        if not cyclic:
            break
        x, y = min(cyclic, key=lambda e: (orders[e], e))
        dropped.append((x, y, orders.pop((x, y))))
        graph.remove_edge(x, y)
    return DerivedConstraints(Constraints(frozenset(orders), frozenset(forbidden)), tuple(dropped))
