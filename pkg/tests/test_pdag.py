import itertools
import random

import pytest

from bnboot.core import Dag, binary_variables
from bnboot.errors import UsageError
from bnboot.io import load_alarm
from bnboot.pdag import Pdag, dag_to_pdag, is_equivalent, markov_neighbors, pdag_ancestors

from oracles import _acyclic, all_dags, group_by_class, oracle_class_key, oracle_pdag

ABC = binary_variables("ABC")
A, B, C = 0, 1, 2


@pytest.fixture(scope="module")
def dags4():
    return all_dags(4)


class TestDagToPdag:
    def test_single_arc_is_undirected(self):
        p = dag_to_pdag(Dag(binary_variables("AB"), [(), (0,)]))
        assert p.directed == frozenset() and p.undirected == {(0, 1)}

    def test_v_structure_compelled(self):
        p = dag_to_pdag(Dag(ABC, [(), (), (A, B)]))
        assert p.directed == {(A, C), (B, C)} and not p.undirected

    def test_chain_undirected(self):
        p = dag_to_pdag(Dag(ABC, [(), (A,), (B,)]))
        assert p.undirected == {(A, B), (B, C)} and not p.directed

    def test_alarm_has_four_undirected_edges(self):
        p = dag_to_pdag(load_alarm().structure)
        assert len(p.undirected) == 4 and len(p.directed) == 42
        names = load_alarm().structure.names
        undirected = {frozenset((names[a], names[b])) for a, b in p.undirected}
        assert undirected == {frozenset(e) for e in [("LVFAILURE", "HISTORY"), ("PULMEMBOLUS", "PAP"),
                                                     ("ANAPHYLAXIS", "TPR"), ("MINVOLSET", "VENTMACH")]}

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_brute_force(self, n):
        dags = all_dags(n)
        groups = group_by_class(dags)
        for g in dags:
            p = dag_to_pdag(g)
            assert (p.directed, p.undirected) == oracle_pdag(g, groups), g

    def test_skeleton_preserved_and_directed_part_acyclic(self, dags4):
        for g in dags4:
            p = dag_to_pdag(g)
            assert p.skeleton == {(min(e), max(e)) for e in g.edges}
            parents = [[a for a, b in p.directed if b == v] for v in range(g.n)]
            assert _acyclic(parents)


class TestIsEquivalent:
    def test_reversed_arc(self):
        assert is_equivalent(Dag(binary_variables("AB"), [(), (0,)]), Dag(binary_variables("AB"), [(1,), ()]))

    def test_v_structure_vs_chain(self):
        collider = Dag(ABC, [(), (), (A, B)])
        chain = Dag(ABC, [(), (C,), (A,)])
        assert not is_equivalent(collider, chain)

    def test_opposite_chains(self):
        assert is_equivalent(Dag(ABC, [(), (A,), (B,)]), Dag(ABC, [(B,), (C,), ()]))

    def test_domain_mismatch(self):
        with pytest.raises(UsageError):
            is_equivalent(Dag(ABC), Dag(binary_variables("XYZ")))

    def test_all_pairs_three_nodes(self):
        dags = all_dags(3)
        for g1, g2 in itertools.product(dags, repeat=2):
            same_pdag = dag_to_pdag(g1) == dag_to_pdag(g2)
            assert same_pdag == is_equivalent(g1, g2)
            assert same_pdag == (oracle_class_key(g1) == oracle_class_key(g2))

    def test_pdag_partition_four_nodes(self, dags4):
        rnd = random.Random(0)
        pdags = {g: dag_to_pdag(g) for g in dags4}
        for _ in range(3000):
            g1, g2 = rnd.choice(dags4), rnd.choice(dags4)
            assert (pdags[g1] == pdags[g2]) == is_equivalent(g1, g2)
        # the two partitions of the 543 DAGs coincide
        by_pdag = {}
        for g, p in pdags.items():
            by_pdag.setdefault(p, set()).add(g)
        by_key = {frozenset(v) for v in group_by_class(dags4).values()}
        assert {frozenset(v) for v in by_pdag.values()} == by_key
        assert len(by_key) == 185


class TestAncestors:
    def test_fully_undirected(self):
        p = dag_to_pdag(Dag(ABC, [(), (A,), (B,)]))
        assert all(pdag_ancestors(p, v) == set() for v in range(3))

    def test_collider(self):
        p = dag_to_pdag(Dag(ABC, [(), (), (A, B)]))
        assert pdag_ancestors(p, C) == {A, B} and pdag_ancestors(p, A) == set()

    def test_transitive(self):
        p = Pdag(ABC, frozenset({(A, B), (B, C)}), frozenset())
        assert pdag_ancestors(p, C) == {A, B}

    def test_through_undirected_flag(self):
        p = Pdag(ABC, frozenset({(B, C)}), frozenset({(A, B)}))
        assert pdag_ancestors(p, C) == {B}
        assert pdag_ancestors(p, C, through_undirected=True) == {A, B}


class TestMarkovNeighbors:
    def test_empty(self):
        assert markov_neighbors(Dag(ABC), A) == set()

    def test_collider(self):
        assert markov_neighbors(Dag(ABC, [(), (), (A, B)]), A) == {B, C}

    def test_chain(self):
        assert markov_neighbors(Dag(ABC, [(), (A,), (B,)]), A) == {B}

    def test_symmetric_and_class_invariant(self, dags4):
        for members in group_by_class(dags4).values():
            ref = [markov_neighbors(members[0], v) for v in range(4)]
            for g in members:
                mn = [markov_neighbors(g, v) for v in range(4)]
                assert mn == ref
                for x in range(4):
                    assert x not in mn[x]
                    for y in mn[x]:
                        assert x in mn[y]


def test_pdag_rejects_overlap():
    with pytest.raises(UsageError):
        Pdag(ABC, frozenset({(A, B)}), frozenset({(A, B)}))
