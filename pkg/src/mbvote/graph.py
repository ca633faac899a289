"""Directed graphs over dense integer node ids."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Edge = tuple[int, int]


class CyclicGraphError(ValueError):
    """Raised when an operation requires a DAG but the graph has a cycle."""


def _check_edge(n: int, u, v) -> Edge:
    u, v = int(u), int(v)
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
    if u == v:
        raise ValueError(f"self-loop on node {u}")
    return u, v


@dataclass(frozen=True)
class Digraph:
    """Immutable directed graph on nodes ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : iterable of (u, v)
        Directed edges. Duplicates collapse; self-loops are rejected.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise ValueError("node count must be non-negative")
        object.__setattr__(self, "n", n)
        object.__setattr__(
            self, "edges", frozenset(_check_edge(n, u, v) for u, v in self.edges)
        )

    @classmethod
    def from_adjacency(cls, adj) -> "Digraph":
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], zip(rows.tolist(), cols.tolist()))

    def to_adjacency(self, dtype=np.int8) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=dtype)
        for u, v in self.edges:
            adj[u, v] = 1
        return adj

    @cached_property
    def _succ(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u].append(v)
        return tuple(tuple(sorted(s)) for s in out)

    @cached_property
    def _pred(self) -> tuple[tuple[int, ...], ...]:
        inn = [[] for _ in range(self.n)]
        for u, v in self.edges:
            inn[v].append(u)
        return tuple(tuple(sorted(s)) for s in inn)

    def children(self, v: int) -> tuple[int, ...]:
        return self._succ[v]

    def parents(self, v: int) -> tuple[int, ...]:
        return self._pred[v]

    @cached_property
    def is_dag(self) -> bool:
        return is_acyclic(self)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={self.sorted_edges()})"


@dataclass(frozen=True)
class WeightedDigraph:
    """Directed graph with a strictly positive weight on every edge."""

    n: int
    weights: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.n)
        clean = {}
        for (u, v), w in dict(self.weights).items():
            w = float(w)
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            clean[_check_edge(n, u, v)] = w
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "weights", clean)

    @cached_property
    def digraph(self) -> Digraph:
        return Digraph(self.n, self.weights.keys())

    @property
    def edges(self) -> frozenset:
        return self.digraph.edges

    def sorted_items(self) -> list[tuple[Edge, float]]:
        return sorted(self.weights.items())


def _kahn(g: Digraph) -> list[int]:
    indeg = [len(g.parents(v)) for v in range(g.n)]
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in g.children(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return order


def is_acyclic(g: Digraph) -> bool:
    return len(_kahn(g)) == g.n


def topological_order(g: Digraph) -> list[int]:
    """Topological order, smallest available id first.

    Raises
    ------
    CyclicGraphError
        If ``g`` has a directed cycle.
    """
    order = _kahn(g)
    if len(order) != g.n:
        raise CyclicGraphError(f"graph has a cycle among {g.n - len(order)} nodes")
    return order


def induced_subgraph(g: Digraph, nodes: Iterable[int]) -> tuple[Digraph, tuple[int, ...]]:
    """Subgraph induced by ``nodes``.

    Returns the local graph and the local-to-global id table; local id ``i``
    is global id ``table[i]``, with ``table`` sorted ascending.
    """
    table = tuple(sorted({int(v) for v in nodes}))
    for v in table:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range for n={g.n}")
    local = {v: i for i, v in enumerate(table)}
    edges = [(local[u], local[v]) for u, v in g.edges if u in local and v in local]
    return Digraph(len(table), edges), table


def to_global(local: Digraph, table: Sequence[int], n: int) -> Digraph:
    """Map a local graph back to global ids."""
    if len(table) != local.n:
        raise ValueError("id table length does not match local node count")
    return Digraph(n, ((table[u], table[v]) for u, v in local.edges))


def edge_union(graphs: Sequence[Digraph]) -> Digraph:
    if not graphs:
        raise ValueError("edge_union needs at least one graph")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise ValueError("graphs have inconsistent node counts")
    edges = set()
    for g in graphs:
        edges |= g.edges
    return Digraph(n, edges)
