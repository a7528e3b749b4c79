import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnboot.bootstrap import BootstrapConfig, ConfidenceReport
from bnboot.core import Dag, binary_variables
from bnboot.errors import UsageError
from bnboot.evaluation import (ConfusionCounts, ExperimentSpec, RecoveryResult, classify, confusion,
                               run_constraint_experiment, run_recovery_experiment, tradeoff_curve)
from bnboot.features import ALL_KINDS, Feature, FeatureKind, feature_universe
from bnboot.io import load_five_node
from bnboot.search import SearchConfig

K = FeatureKind
ABC = binary_variables("ABC")
COLLIDER = Dag(ABC, [(), (), (0, 1)])
FAST = BootstrapConfig(m=3, search=SearchConfig(max_restarts=1))


def report(conf, n=3):
    return ConfidenceReport("nonparametric", None, tuple("ABCDE"[:n]), ALL_KINDS, conf)


class TestClassify:
    def test_inclusive_threshold(self):
        r = report({Feature(K.DIRECTED_EDGE, 0, 2): 0.8, Feature(K.DIRECTED_EDGE, 1, 2): 0.79})
        assert classify(r, 0.8, K.DIRECTED_EDGE) == {Feature(K.DIRECTED_EDGE, 0, 2)}

    def test_zero_threshold_takes_universe(self):
        assert classify(report({}), 0.0, K.MARKOV_NEIGHBOR) == set(feature_universe(3, K.MARKOV_NEIGHBOR))

    def test_above_one_takes_nothing(self):
        r = report({f: 1.0 for f in feature_universe(3)})
        assert classify(r, 1.01) == set()


class TestConfusion:
    def test_perfect(self):
        pos = {Feature(K.DIRECTED_EDGE, 0, 2), Feature(K.DIRECTED_EDGE, 1, 2)}
        assert confusion(pos, COLLIDER, K.DIRECTED_EDGE) == ConfusionCounts(2, 0, 0, 4)

    def test_mixed(self):
        pos = {Feature(K.DIRECTED_EDGE, 0, 2), Feature(K.DIRECTED_EDGE, 2, 1), Feature(K.MARKOV_NEIGHBOR, 0, 1)}
        c = confusion(pos, COLLIDER, K.DIRECTED_EDGE)
        assert (c.true_positives, c.false_positives, c.false_negatives) == (1, 1, 1)
        assert c.total == 6

    def test_empty_golden(self):
        c = confusion(set(), Dag(ABC), "undirected")
        assert c == ConfusionCounts(0, 0, 0, 3)


class TestTradeoff:
    def test_values(self):
        r = report({Feature(K.DIRECTED_EDGE, 0, 2): 0.9, Feature(K.DIRECTED_EDGE, 2, 1): 0.6,
                    Feature(K.DIRECTED_EDGE, 1, 2): 0.3})
        assert tradeoff_curve(r, COLLIDER, [0.95, 0.8, 0.5, 0.2], K.DIRECTED_EDGE) == [
            (0.95, 0, 2), (0.8, 0, 1), (0.5, 1, 1), (0.2, 1, 0)]

    def test_requires_descending(self):
        with pytest.raises(UsageError):
            tradeoff_curve(report({}), COLLIDER, [0.5, 0.8], K.DIRECTED_EDGE)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=len(feature_universe(3)), max_size=len(feature_universe(3))),
           st.lists(st.floats(0, 1), min_size=1, max_size=6), st.sampled_from(ALL_KINDS))
    def test_monotone(self, values, thresholds, kind):
        r = report(dict(zip(feature_universe(3), values)))
        curve = tradeoff_curve(r, COLLIDER, sorted(thresholds, reverse=True), kind)
        for (_, fp1, fn1), (_, fp2, fn2) in zip(curve, curve[1:]):
            assert fp2 >= fp1 and fn2 <= fn1


class TestRecovery:
    def test_smoke(self):
        spec = ExperimentSpec(load_five_node(), sizes=(50,), replicates=2, bootstrap=FAST,
                              thresholds=(0.5, 0.9), include_tn=True)
        res = run_recovery_experiment(spec, keep_reports=True)
        assert len(res.reports) == 2
        tp, _ = res.get(50, 0.9, K.DIRECTED_EDGE, "tp")
        fn, _ = res.get(50, 0.9, K.DIRECTED_EDGE, "fn")
        assert tp + fn == 4  # five-node golden has four compelled arcs
        tn, _ = res.get(50, 0.5, K.MARKOV_NEIGHBOR, "tn")
        assert tn >= 0
        with pytest.raises(KeyError):
            res.get(50, None, K.UNDIRECTED_EDGE, "true_conf")
        rows = list(csv.reader(io.StringIO(res.to_csv())))
        assert tuple(rows[0]) == RecoveryResult.HEADER
        assert {r[3] for r in rows[1:]} == {"tp", "fp", "fn", "tn", "true_conf", "false_conf"}

    def test_deterministic(self):
        spec = ExperimentSpec(load_five_node(), sizes=(40,), replicates=1, bootstrap=FAST, seed=3)
        assert run_recovery_experiment(spec).to_csv() == run_recovery_experiment(spec).to_csv()

    def test_bad_spec(self):
        with pytest.raises(UsageError):
            ExperimentSpec(load_five_node(), sizes=())
        with pytest.raises(UsageError):
            ExperimentSpec(load_five_node(), replicates=0)


class TestConstraintExperiment:
    def test_noop_thresholds_give_identical_arms(self):
        spec = ExperimentSpec(load_five_node(), sizes=(60,), replicates=2, bootstrap=FAST)
        res = run_constraint_experiment(spec, test_size=200, order_threshold=1.01, markov_threshold=-0.01)
        for run in res.runs:
            assert run.constrained == run.unconstrained
            assert run.scores["constrained"] == run.scores["unconstrained"]
        assert res.get(60, "constrained", "satisfied") == (1.0, 0.0)
        rows = list(csv.reader(io.StringIO(res.to_csv())))
        assert rows[0] == ["size", "arm", "metric", "mean", "sd"]

    def test_default_thresholds_satisfied(self):
        spec = ExperimentSpec(load_five_node(), sizes=(80,), replicates=2, bootstrap=FAST)
        res = run_constraint_experiment(spec, test_size=200)
        assert all(run.satisfied for run in res.runs)
        for run in res.runs:
            assert run.scores["constrained"] <= run.scores["unconstrained"] + 0.5

    def test_bad_test_size(self):
        with pytest.raises(UsageError):
            run_constraint_experiment(ExperimentSpec(load_five_node()), test_size=0)


@pytest.fixture(scope="module")
def five_node_sweep():
    spec = ExperimentSpec(load_five_node(), sizes=(100, 1000), replicates=10, bootstrap=BootstrapConfig(m=50),
                          seed=11)
    return run_recovery_experiment(spec)


def test_markov_errors_are_cautious(five_node_sweep):
    fp, _ = five_node_sweep.get(1000, 0.8, K.MARKOV_NEIGHBOR, "fp")
    fn, _ = five_node_sweep.get(1000, 0.8, K.MARKOV_NEIGHBOR, "fn")
    assert fp <= fn


@pytest.mark.parametrize("t", [0.95, 0.8, 0.75, 0.5])
def test_more_data_more_true_positives(five_node_sweep, t):
    for kind in (K.DIRECTED_EDGE, K.MARKOV_NEIGHBOR, K.ANCESTOR_ORDER):
        assert five_node_sweep.get(1000, t, kind, "tp")[0] >= five_node_sweep.get(100, t, kind, "tp")[0]
