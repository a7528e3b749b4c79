import csv
import json
import subprocess
import sys

import pytest

from bnboot import cli
from bnboot.core import Dag, binary_variables
from bnboot.io import load_alarm, load_five_node, read_dataset, read_network, write_dataset, write_network

from oracles import correlated_pair

FAST = ["--restarts", "2"]


@pytest.fixture
def alarm_file(tmp_path):
    p = tmp_path / "alarm.json"
    write_network(load_alarm(), p)
    return p


@pytest.fixture
def five_file(tmp_path):
    p = tmp_path / "five.json"
    write_network(load_five_node(), p)
    return p


@pytest.fixture
def pair_csv(tmp_path):
    p = tmp_path / "pair.csv"
    write_dataset(correlated_pair(300), p)
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestSample:
    def test_alarm(self, tmp_path, alarm_file):
        out = tmp_path / "d.csv"
        assert run("sample", alarm_file, "--count", 100, "--seed", 1, "--out", out) == 0
        rows = list(csv.reader(out.open()))
        assert len(rows) == 101 and all(len(r) == 37 for r in rows)
        manifest = json.loads((tmp_path / "d.csv.manifest.json").read_text())
        assert manifest["command"] == "sample" and manifest["seed"] == 1

    def test_zero_rows(self, tmp_path, alarm_file):
        out = tmp_path / "d.csv"
        assert run("sample", alarm_file, "--count", 0, "--out", out) == 0
        assert len(out.read_text().splitlines()) == 1

    def test_reproducible(self, tmp_path, alarm_file):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("sample", alarm_file, "--count", 50, "--seed", 9, "--out", a)
        run("sample", alarm_file, "--count", 50, "--seed", 9, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_negative_count(self, tmp_path, alarm_file):
        assert run("sample", alarm_file, "--count", -1, "--out", tmp_path / "d.csv") == 1


class TestLearn:
    def test_correlated_pair(self, tmp_path, pair_csv):
        out = tmp_path / "n.json"
        assert run("learn", pair_csv, "--out", out) == 0
        bn = read_network(out)
        assert len(bn.structure.edges) == 1
        meta = json.loads(out.read_text())["metadata"]
        assert meta["normalized_score"] == pytest.approx(meta["score"] / 300)

    def test_tree(self, tmp_path, pair_csv):
        assert run("learn", pair_csv, "--tree", "--out", tmp_path / "n.json") == 0
        assert read_network(tmp_path / "n.json").structure.edges == [(0, 1)]

    def test_forbidding_constraints(self, tmp_path, pair_csv):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"forbidden_parents": [["X", "Y"], ["Y", "X"]]}))
        assert run("learn", pair_csv, "--constraints", c, "--out", tmp_path / "n.json") == 0
        assert read_network(tmp_path / "n.json").structure.edges == []

    def test_tree_with_constraints_is_usage_error(self, tmp_path, pair_csv):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"required_orders": [["Y", "X"]]}))
        assert run("learn", pair_csv, "--tree", "--constraints", c, "--out", tmp_path / "n.json") == 1

    def test_domain_flag(self, tmp_path, five_file):
        d = tmp_path / "d.csv"
        run("sample", five_file, "--count", 40, "--out", d)
        assert run("learn", d, "--domain", five_file, "--out", tmp_path / "n.json") == 0
        assert read_network(tmp_path / "n.json").variables == load_five_node().variables

    def test_violation_exits_3(self, tmp_path, pair_csv, monkeypatch):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"forbidden_parents": [["X", "Y"]]}))
        monkeypatch.setattr(cli, "learn_structure",
                            lambda data, *a, **k: Dag(data.variables, [(), (0,)]))
        assert run("learn", pair_csv, "--constraints", c, "--out", tmp_path / "n.json") == 3


class TestBootstrap:
    def test_single_replicate(self, tmp_path, pair_csv):
        out = tmp_path / "r.csv"
        assert run("bootstrap", pair_csv, "--m", 1, *FAST, "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert rows and all(r["confidence"] in ("1.000000", "0.000000") for r in rows)
        manifest = json.loads((tmp_path / "r.csv.manifest.json").read_text())
        assert "jobs" not in manifest["config"] and manifest["config"]["m"] == 1

    def test_bayes(self, tmp_path, pair_csv):
        out = tmp_path / "r.csv"
        assert run("bootstrap", pair_csv, "--method", "bayes", "--m", 3, *FAST, "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert {r["method"] for r in rows} == {"bayesian_weighted"}

    def test_kinds(self, tmp_path, pair_csv):
        out = tmp_path / "r.csv"
        assert run("bootstrap", pair_csv, "--m", 2, "--kinds", "markov", *FAST, "--out", out) == 0
        assert {r["kind"] for r in csv.DictReader(out.open())} == {"markov_neighbor"}

    def test_unknown_method(self, tmp_path, pair_csv):
        assert run("bootstrap", pair_csv, "--method", "jackknife", "--out", tmp_path / "r.csv") == 1

    def test_malformed_dataset(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("X,Y\n0,1\n1\n")
        assert run("bootstrap", p, "--out", tmp_path / "r.csv") == 2


class TestConstrain:
    def write_report(self, tmp_path, lines):
        p = tmp_path / "r.csv"
        p.write_text("method,kind,x,y,confidence\n" + "".join(l + "\n" for l in lines))
        return p

    def test_single_order(self, tmp_path):
        r = self.write_report(tmp_path, ["nonparametric,ancestor_order,A,B,0.850000",
                                         "nonparametric,markov_neighbor,A,B,1.000000"])
        out = tmp_path / "c.json"
        assert run("constrain", r, "--out", out) == 0
        doc = json.loads(out.read_text())
        assert doc == {"required_orders": [["A", "B"]], "forbidden_parents": [], "dropped": []}

    def test_empty_report(self, tmp_path):
        r = self.write_report(tmp_path, [])
        out = tmp_path / "c.json"
        assert run("constrain", r, "--out", out) == 0
        assert json.loads(out.read_text())["required_orders"] == []

    def test_cycle_dropped(self, tmp_path):
        r = self.write_report(tmp_path, ["np,ancestor_order,A,B,0.950000", "np,ancestor_order,B,C,0.900000",
                                         "np,ancestor_order,C,A,0.850000"])
        out = tmp_path / "c.json"
        assert run("constrain", r, "--out", out) == 0
        doc = json.loads(out.read_text())
        assert doc["required_orders"] == [["A", "B"], ["B", "C"]]
        assert doc["dropped"] == [["C", "A", 0.85]]

    def test_bad_report(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("nonsense\n")
        assert run("constrain", p, "--out", tmp_path / "c.json") == 2


class TestEvaluate:
    def test_recovery(self, tmp_path, five_file):
        out = tmp_path / "t.csv"
        code = run("evaluate", five_file, "--sizes", "40", "--replicates", 1, "--m", 2,
                   "--thresholds", "0.5", *FAST, "--out", out)
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert {r["metric"] for r in rows} >= {"tp", "fp", "fn"}

    def test_constraints(self, tmp_path, five_file):
        out = tmp_path / "t.csv"
        code = run("evaluate", five_file, "--experiment", "constraints", "--sizes", "40", "--replicates", 1,
                   "--m", 2, "--test-size", 100, *FAST, "--out", out)
        assert code == 0
        assert {r["arm"] for r in csv.DictReader(out.open())} == {"constrained", "unconstrained"}

    def test_structure_only_golden(self, tmp_path):
        g = tmp_path / "g.json"
        write_network(Dag(binary_variables("AB")), g)
        assert run("evaluate", g, "--out", tmp_path / "t.csv") == 2


def test_bad_arguments_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["sample"])
    assert info.value.code == 1


def test_module_entry_point(tmp_path, five_file):
    out = tmp_path / "d.csv"
    proc = subprocess.run([sys.executable, "-m", "bnboot", "sample", str(five_file), "--count", "5",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert read_dataset(out, load_five_node().variables).n_rows == 5
