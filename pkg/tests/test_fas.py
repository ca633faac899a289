import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbvote.fas import break_cycles, greedy_order
from mbvote.graph import Digraph, WeightedDigraph, is_acyclic
from mbvote.synth import gen_er_dag


def _backward(g, order):
    pos = {v: i for i, v in enumerate(order)}
    return [(u, v) for u, v in g.edges if pos[u] > pos[v]]


def _min_fas_weight(wg):
    edges = sorted(wg.weights)
    best = float("inf")
    for r in range(len(edges) + 1):
        for cut in itertools.combinations(edges, r):
            w = sum(wg.weights[e] for e in cut)
            if w < best and is_acyclic(Digraph(wg.n, set(edges) - set(cut))):
                best = w
    return best


@st.composite
def weighted_digraphs(draw, max_n=5):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=10))
    ws = draw(st.lists(st.integers(1, 10_000), min_size=len(edges), max_size=len(edges), unique=True))
    return WeightedDigraph(n, {e: w / 10_000 for e, w in zip(edges, ws)})


class TestGreedyOrder:
    @pytest.mark.parametrize("seed", range(10))
    def test_dag_has_no_backward_edges(self, seed):
        g = gen_er_dag(15, 3, seed)
        assert _backward(g, greedy_order(g)) == []

    def test_two_cycle(self):
        g = Digraph(2, [(0, 1), (1, 0)])
        assert len(_backward(g, greedy_order(g))) == 1

    def test_three_cycle(self):
        g = Digraph(3, [(0, 1), (1, 2), (2, 0)])
        order = greedy_order(g)
        assert sorted(order) == [0, 1, 2] and len(_backward(g, order)) == 1

    def test_source_sink_placement(self):
        g = Digraph(4, [(0, 1), (1, 2), (2, 1), (2, 3)])
        order = greedy_order(g)
        assert order[0] == 0 and order[-1] == 3


class TestBreakCycles:
    def test_identity_on_dag(self):
        g = gen_er_dag(10, 2, 1)
        res = break_cycles(g)
        assert res.removed_edges == [] and res.dag == g

    def test_two_cycle_example(self):
        res = break_cycles(WeightedDigraph(2, {(0, 1): 0.8, (1, 0): 0.3}))
        assert res.removed_edges == [(1, 0, 0.3)] and res.dag.edges == {(0, 1)}

    def test_two_disjoint_cycles(self):
        wg = WeightedDigraph(4, {(0, 1): 0.9, (1, 0): 0.2, (2, 3): 0.6, (3, 2): 0.1})
        res = break_cycles(wg)
        assert res.order == [0, 2, 3, 1]
        assert {(u, v) for u, v, _ in res.removed_edges} == {(1, 0), (3, 2)}

    def test_two_disjoint_cycles_heavier_backward(self):
        # unweighted tie-breaking fixes the order, so the heavier edge can be backward
        wg = WeightedDigraph(4, {(0, 1): 0.9, (1, 0): 0.2, (2, 3): 0.1, (3, 2): 0.6})
        res = break_cycles(wg)
        assert {(u, v) for u, v, _ in res.removed_edges} == {(1, 0), (3, 2)}
        assert _min_fas_weight(wg) == pytest.approx(0.3)

    def test_to_dict(self):
        d = break_cycles(WeightedDigraph(2, {(0, 1): 0.8, (1, 0): 0.3})).to_dict()
        assert d["removed"] == [[1, 0, 0.3]] and sorted(d["order"]) == [0, 1]

    @settings(max_examples=150, deadline=None)
    @given(weighted_digraphs())
    def test_properties(self, wg):
        res = break_cycles(wg)
        assert is_acyclic(res.dag)
        removed = {(u, v) for u, v, _ in res.removed_edges}
        assert removed <= set(wg.weights)
        assert res.dag.edges == set(wg.weights) - removed
        back = _backward(Digraph(wg.n, wg.weights), res.order)
        removed_w = sum(w for *_, w in res.removed_edges)
        assert removed_w <= sum(wg.weights[e] for e in back) + 1e-12
        assert removed_w >= _min_fas_weight(wg) - 1e-12
