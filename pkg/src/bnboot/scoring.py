"""BDe scoring with a uniform (BDeu-style) Dirichlet prior.

The network score is the log marginal likelihood of the data, which
decomposes into one term per family (child, parent set). The structure prior
is uniform and therefore dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .core import BayesianNetwork, Dag, Dataset, _config_index
from .errors import UsageError

DEFAULT_ESS = 5.0


@dataclass(frozen=True)
class FamilyStats:
    """Contingency counts ``counts[j, k] = N_ijk`` for one family."""

    child: int
    parents: tuple[int, ...]
    counts: np.ndarray

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def child_arity(self) -> int:
        return self.counts.shape[1]

    @property
    def n_configs(self) -> int:
        return self.counts.shape[0]


def count_family_stats(dataset: Dataset, child: int, parents: Sequence[int]) -> FamilyStats:
    n = len(dataset.variables)
    parents = tuple(int(p) for p in parents)
    for v in (child, *parents):
        if not 0 <= v < n:
            raise UsageError(f"variable index {v} out of range")
    if child in parents:
        raise UsageError("child cannot be among its parents")
    arities = [v.arity for v in dataset.variables]
    r = arities[child]
    q = int(np.prod([arities[p] for p in parents], dtype=np.int64))
    data = dataset.data
    idx = _config_index(data, parents, arities) * r + data[:, child]
    counts = np.bincount(idx, minlength=q * r).reshape(q, r)
    return FamilyStats(child, parents, counts)


def family_score(stats: FamilyStats, ess: float = DEFAULT_ESS) -> float:
    if not ess > 0:
        raise UsageError("equivalent sample size must be positive")
    counts = stats.counts
    q, r = counts.shape
    a_ij = ess / q
    a_ijk = ess / (q * r)
    n_ij = counts.sum(axis=1)
    # configurations with no data contribute exactly zero
    seen = n_ij > 0
    if not seen.any():
        return 0.0
    n_ij = n_ij[seen]
    n_ijk = counts[seen]
    score = np.sum(gammaln(a_ij) - gammaln(a_ij + n_ij))
    score += np.sum(gammaln(a_ijk + n_ijk) - gammaln(a_ijk))
    return float(score)


class ScoreCache:
    """Family scores for one (dataset, ess) pair, keyed by (child, sorted parents)."""

    def __init__(self, dataset: Dataset, ess: float = DEFAULT_ESS):
        if not ess > 0:
            raise UsageError("equivalent sample size must be positive")
        self.dataset = dataset
        self.ess = float(ess)
        self._scores: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, child: int, parents: Iterable[int]) -> float:
        key = (child, tuple(sorted(parents)))
        score = self._scores.get(key)
        if score is None:
            score = family_score(count_family_stats(self.dataset, child, key[1]), self.ess)
            self._scores[key] = score
        return score

    def __len__(self):
        return len(self._scores)

    def __contains__(self, key):
        child, parents = key
        return (child, tuple(sorted(parents))) in self._scores


def network_score(dag: Dag, dataset: Dataset, ess: float = DEFAULT_ESS,
                  cache: ScoreCache | None = None) -> float:
    if tuple(dag.variables) != tuple(dataset.variables):
        raise UsageError("structure and dataset have different variable domains")
    if cache is None:
        cache = ScoreCache(dataset, ess)
    elif cache.dataset is not dataset or cache.ess != float(ess):
        raise UsageError("score cache belongs to a different dataset or ess")
    return float(sum(cache.family(i, pa) for i, pa in enumerate(dag.parents)))


def normalized_score(score: float, n: int) -> float:
    """Score per instance."""
    if n < 1:
        raise UsageError("dataset size must be at least 1")
    return score / n


def fit_parameters(dag: Dag, dataset: Dataset, ess: float = DEFAULT_ESS) -> BayesianNetwork:
    """Posterior-mean tables under the same uniform Dirichlet prior as the score."""
    if tuple(dag.variables) != tuple(dataset.variables):
        raise UsageError("structure and dataset have different variable domains")
    if not ess > 0:
        raise UsageError("equivalent sample size must be positive")
    tables = []
    for i, pa in enumerate(dag.parents):
        counts = count_family_stats(dataset, i, pa).counts.astype(float)
        q, r = counts.shape
        tables.append((counts + ess / (q * r)) / (counts.sum(axis=1, keepdims=True) + ess / q))
    return BayesianNetwork(dag, tables)
