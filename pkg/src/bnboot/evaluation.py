"""Golden-model evaluation: threshold classification, confusion counts and the
two experiment pipelines (feature recovery, constrained re-learning)."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .bootstrap import BootstrapConfig, ConfidenceReport, derive_constraints, learn_structure, run_bootstrap
from .core import BayesianNetwork, Dag, derive_seed, forward_sample, test_log_loss
from .errors import UsageError
from .features import ALL_KINDS, Feature, FeatureKind, _normalize_kinds, extract_features, feature_universe
from .scoring import fit_parameters, network_score, normalized_score
from .search import SearchConfig, satisfies

DEFAULT_SIZES = (100, 250, 500, 1000)
DEFAULT_THRESHOLDS = (0.95, 0.8, 0.75, 0.5)


@dataclass(frozen=True)
class ConfusionCounts:
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int

    @property
    def total(self) -> int:
        return self.true_positives + self.false_positives + self.false_negatives + self.true_negatives


def classify(report: ConfidenceReport, t: float, kinds=None) -> set[Feature]:
    """Features whose confidence is at least ``t`` (inclusive)."""
    kinds = report.kinds if kinds is None else _normalize_kinds(kinds)
    return {f for f in feature_universe(len(report.names), kinds) if report.confidence(f) >= t}


def confusion(positives: Iterable[Feature], golden_dag: Dag, kind: FeatureKind | str) -> ConfusionCounts:
    kind = _normalize_kinds(kind)[0]
    positives = {f for f in positives if f.kind is kind}
    golden = extract_features(golden_dag, kind)
    universe = len(feature_universe(golden_dag.n, kind))
    tp = len(positives & golden)
    fp = len(positives - golden)
    fn = len(golden - positives)
    return ConfusionCounts(tp, fp, fn, universe - tp - fp - fn)


def tradeoff_curve(report: ConfidenceReport, golden_dag: Dag, thresholds: Sequence[float],
                   kind: FeatureKind | str) -> list[tuple[float, int, int]]:
    """``(t, FP, FN)`` for each threshold, thresholds given in descending order."""
    thresholds = list(thresholds)
    if any(a < b for a, b in zip(thresholds, thresholds[1:])):
        raise UsageError("thresholds must be sorted in descending order")
    out = []
    for t in thresholds:
        c = confusion(classify(report, t, kind), golden_dag, kind)
        out.append((t, c.false_positives, c.false_negatives))
    return out


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def _fmt_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.6f}"


def _fmt_threshold(t) -> str:
    return "" if t is None else f"{t:g}"


@dataclass
class ExperimentSpec:
    golden: BayesianNetwork
    sizes: tuple[int, ...] = DEFAULT_SIZES
    replicates: int = 10
    bootstrap: BootstrapConfig = BootstrapConfig()
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    kinds: tuple[FeatureKind, ...] = ALL_KINDS
    seed: int = 0
    include_tn: bool = False

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.thresholds = tuple(sorted((float(t) for t in self.thresholds), reverse=True))
        self.kinds = _normalize_kinds(self.kinds)
        if not self.sizes or not self.thresholds:
            raise UsageError("sizes and thresholds must be non-empty")
        if any(s < 1 for s in self.sizes):
            raise UsageError("dataset sizes must be positive")
        if self.replicates < 1:
            raise UsageError("replicates must be at least 1")


@dataclass
class RecoveryResult:
    """Aggregated rows ``(size, threshold, kind, metric, mean, sd)``.

    Threshold-free metrics (``true_conf``, ``false_conf``: mean confidence
    over golden / non-golden features) carry ``threshold=None``.
    """

    rows: list[tuple] = field(default_factory=list)
    reports: dict = field(default_factory=dict, repr=False)

    HEADER = ("size", "threshold", "kind", "metric", "mean", "sd")

    def get(self, size, threshold, kind, metric) -> tuple[float, float]:
        kind = _normalize_kinds(kind)[0]
        for s, t, k, mt, mean, sd in self.rows:
            if s == size and k is kind and mt == metric and (t == threshold or (t is None and threshold is None)):
                return mean, sd
        raise KeyError((size, threshold, kind, metric))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        for s, t, k, mt, mean, sd in self.rows:
            w.writerow([s, _fmt_threshold(t), k.value, mt, _fmt_num(mean), _fmt_num(sd)])
        return buf.getvalue()


def _bootstrap_config(spec: ExperimentSpec, size: int, r: int, **overrides) -> BootstrapConfig:
    return replace(spec.bootstrap, seed=derive_seed(spec.seed, "bootstrap", size, r), **overrides)


def run_recovery_experiment(spec: ExperimentSpec, keep_reports: bool = False, progress=None) -> RecoveryResult:
    """Sample datasets from the golden model, bootstrap each, and score the
    thresholded feature sets against the golden structure."""
    golden = spec.golden.structure
    n = golden.n
    metrics = ["tp", "fp", "fn"] + (["tn"] if spec.include_tn else [])
    result = RecoveryResult()
    for size in spec.sizes:
        per_cell: dict[tuple, list[float]] = {}
        for r in range(spec.replicates):
            data = forward_sample(spec.golden, size, derive_seed(spec.seed, "data", size, r))
            report = run_bootstrap(data, _bootstrap_config(spec, size, r, kinds=spec.kinds))
            if keep_reports:
                result.reports[(size, r)] = report
            for kind in spec.kinds:
                truth = extract_features(golden, kind)
                universe = feature_universe(n, kind)
                if truth:
                    per_cell.setdefault((None, kind, "true_conf"), []).append(
                        float(np.mean([report.confidence(f) for f in truth])))
                false = [f for f in universe if f not in truth]
                if false:
                    per_cell.setdefault((None, kind, "false_conf"), []).append(
                        float(np.mean([report.confidence(f) for f in false])))
                for t in spec.thresholds:
                    c = confusion(classify(report, t, kind), golden, kind)
                    values = {"tp": c.true_positives, "fp": c.false_positives,
                              "fn": c.false_negatives, "tn": c.true_negatives}
                    for mt in metrics:
                        per_cell.setdefault((t, kind, mt), []).append(values[mt])
            if progress:
                progress(f"recovery size={size} replicate={r + 1}/{spec.replicates}")
        for kind in spec.kinds:
            for mt in ("true_conf", "false_conf"):
                if (None, kind, mt) in per_cell:
                    result.rows.append((size, None, kind, mt, *_mean_sd(per_cell[(None, kind, mt)])))
            for t in spec.thresholds:
                for mt in metrics:
                    result.rows.append((size, t, kind, mt, *_mean_sd(per_cell[(t, kind, mt)])))
    return result


@dataclass
class ConstraintRun:
    size: int
    replicate: int
    constrained: Dag
    unconstrained: Dag
    constraints: object
    satisfied: bool
    scores: dict
    log_losses: dict


@dataclass
class ConstraintResult:
    rows: list[tuple] = field(default_factory=list)
    runs: list[ConstraintRun] = field(default_factory=list, repr=False)

    HEADER = ("size", "arm", "metric", "mean", "sd")

    def get(self, size, arm, metric) -> tuple[float, float]:
        for s, a, mt, mean, sd in self.rows:
            if s == size and a == arm and mt == metric:
                return mean, sd
        raise KeyError((size, arm, metric))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        for s, a, mt, mean, sd in self.rows:
            w.writerow([s, a, mt, _fmt_num(mean), _fmt_num(sd)])
        return buf.getvalue()


def run_constraint_experiment(spec: ExperimentSpec, test_size: int = 10000,
                              order_threshold: float = 0.8, markov_threshold: float = 0.05,
                              progress=None) -> ConstraintResult:
    """Learn with and without bootstrap-derived constraints and compare the
    normalized training score and held-out log-loss of the two arms."""
    if test_size < 1:
        raise UsageError("test_size must be positive")
    ess = spec.bootstrap.search.ess
    result = ConstraintResult()
    for size in spec.sizes:
        cells: dict[tuple, list[float]] = {}
        for r in range(spec.replicates):
            train = forward_sample(spec.golden, size, derive_seed(spec.seed, "data", size, r))
            test = forward_sample(spec.golden, test_size, derive_seed(spec.seed, "test", size, r))
            report = run_bootstrap(train, _bootstrap_config(
                spec, size, r, method="nonparametric",
                kinds=(FeatureKind.MARKOV_NEIGHBOR, FeatureKind.ANCESTOR_ORDER)))
            derived = derive_constraints(report, order_threshold, markov_threshold)
            search = replace(spec.bootstrap.search, seed=derive_seed(spec.seed, "search", size, r))
            learner = spec.bootstrap.learner
            dags = {
                "constrained": learn_structure(train, search, learner, derived.constraints),
                "unconstrained": learn_structure(train, search, learner),
            }
            ok = satisfies(dags["constrained"], derived.constraints)
            scores, losses = {}, {}
            for arm, dag in dags.items():
                scores[arm] = normalized_score(network_score(dag, train, ess), size)
                losses[arm] = test_log_loss(fit_parameters(dag, train, ess), test)
                cells.setdefault((arm, "normalized_score"), []).append(scores[arm])
                cells.setdefault((arm, "log_loss"), []).append(losses[arm])
            cells.setdefault(("constrained", "satisfied"), []).append(float(ok))
            result.runs.append(ConstraintRun(size, r, dags["constrained"], dags["unconstrained"],
                                             derived, ok, scores, losses))
            if progress:
                progress(f"constraints size={size} replicate={r + 1}/{spec.replicates}")
        for (arm, mt), values in cells.items():
            result.rows.append((size, arm, mt, *_mean_sd(values)))
    return result
