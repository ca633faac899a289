"""Greedy feedback-arc-set removal on weighted digraphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Union

from .graph import Digraph, WeightedDigraph, is_acyclic


@dataclass(frozen=True)
class FasResult:
    order: list
    removed_edges: list  # (u, v, weight), in removal order
    dag: Digraph

    def to_dict(self) -> dict:
        return {"order": list(self.order), "removed": [[u, v, w] for u, v, w in self.removed_edges]}


def _as_weighted(g: Union[Digraph, WeightedDigraph]) -> WeightedDigraph:
    if isinstance(g, WeightedDigraph):
        return g
    return WeightedDigraph(g.n, {e: 1.0 for e in g.edges})


def greedy_order(g: Union[Digraph, WeightedDigraph]) -> list[int]:
    """Eades-style linear arrangement ``s1 + s2``.

    Sinks are peeled into the front of ``s2`` and sources onto the end of
    ``s1`` (each batch in ascending id); when neither exists the node with
    the largest ``outdeg - indeg`` (unweighted, lowest id on ties) goes to
    ``s1``.
    """
    n = g.n
    succ = [set() for _ in range(n)]
    pred = [set() for _ in range(n)]
    for u, v in g.edges:
        succ[u].add(v)
        pred[v].add(u)
    remaining = set(range(n))
    sinks = {v for v in range(n) if not succ[v]}
    sources = {v for v in range(n) if not pred[v]}

    def remove(v):
        for u in pred[v]:
            succ[u].discard(v)
            if not succ[u]:
                sinks.add(u)
        for w in succ[v]:
            pred[w].discard(v)
            if not pred[w]:
                sources.add(w)
        remaining.discard(v)
        sinks.discard(v)
        sources.discard(v)

    s1: list[int] = []
    s2: deque[int] = deque()
    while remaining:
        if sinks:
            for v in sorted(sinks):
                s2.appendleft(v)
                remove(v)
        elif sources:
            for v in sorted(sources):
                if v in remaining:
                    s1.append(v)
                    remove(v)
        else:
            v = max(sorted(remaining), key=lambda x: len(succ[x]) - len(pred[x]))
            s1.append(v)
            remove(v)
    return s1 + list(s2)


def break_cycles(g: Union[Digraph, WeightedDigraph]) -> FasResult:
    """Remove backward edges, lightest first, until the graph is acyclic.

    Backward edges are taken relative to :func:`greedy_order`; ties in
    weight are broken by ascending ``(u, v)``.
    """
    wg = _as_weighted(g)
    order = greedy_order(wg)
    pos = {v: i for i, v in enumerate(order)}
    backward = sorted((w, u, v) for (u, v), w in wg.weights.items() if pos[u] > pos[v])
    edges = set(wg.weights)
    removed = []
    dag = Digraph(wg.n, edges)
    for w, u, v in backward:
        if is_acyclic(dag):
            break
        edges.discard((u, v))
        removed.append((u, v, w))
        dag = Digraph(wg.n, edges)
    return FasResult(order, removed, dag)
