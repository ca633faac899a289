"""Random ground-truth DAGs and observational data from structural equation models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx
import numpy as np

from .graph import Digraph, Edge, CyclicGraphError, topological_order

CLIP = 1e6

# stage keys mixed into the master seed
STAGE_GRAPH, STAGE_WEIGHTS, STAGE_NOISE, STAGE_SUBGRAPH = 1, 2, 3, 4


class ZeroVarianceError(ValueError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has zero variance")


def derive_seed(master: int, *keys: int) -> int:
    """Stable 63-bit seed derived from ``master`` and integer keys."""
    hi, lo = np.random.SeedSequence([int(master), *map(int, keys)]).generate_state(2)
    return (int(hi) << 31) ^ int(lo)


def gen_er_dag(n: int, h: float, seed: int) -> Digraph:
    """Erdos-Renyi DAG with edge probability ``h / (n - 1)`` under a random order.

    The expected number of edges is ``n * h / 2``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < h <= n - 1:
        raise ValueError(f"h must lie in (0, n-1], got {h}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    theta = h / (n - 1)
    mask = np.triu(rng.random((n, n)) < theta, k=1)
    rows, cols = np.nonzero(mask)
    return Digraph(n, zip(perm[rows].tolist(), perm[cols].tolist()))


def gen_sf_dag(n: int, h: float, seed: int) -> Digraph:
    """Barabasi-Albert DAG, edges oriented from earlier- to later-attached node.

    Each new node attaches ``ceil(h / 2)`` edges; node labels are shuffled so
    the attachment order is a random topological order.
    """
    m_att = math.ceil(h / 2) if h > 0 else 0
    if n < 2 or m_att < 1 or m_att >= n:
        raise ValueError(f"invalid scale-free parameters n={n}, h={h}")
    rng = np.random.default_rng(seed)
    ba = nx.barabasi_albert_graph(n, m_att, seed=int(rng.integers(2**31)))
    perm = rng.permutation(n)
    return Digraph(n, ((int(perm[min(u, v)]), int(perm[max(u, v)])) for u, v in ba.edges()))


@dataclass(frozen=True)
class WeightedSCM:
    graph: Digraph
    weights: Mapping[Edge, float] = field(default_factory=dict)
    noise_scale: float = 1.0

    def __post_init__(self):
        if not self.graph.is_dag:
            raise CyclicGraphError("SCM graph must be acyclic")
        if set(self.weights) != set(self.graph.edges):
            raise ValueError("weights must cover exactly the graph edges")
        if not self.noise_scale > 0:
            raise ValueError("noise_scale must be positive")

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((self.graph.n, self.graph.n))
        for (u, v), w in self.weights.items():
            W[u, v] = w
        return W


def sample_weights(g: Digraph, low: float = 0.5, high: float = 2.0, seed: int = 0,
                   noise_scale: float = 1.0) -> WeightedSCM:
    """Edge coefficients uniform on ``[-high, -low] U [low, high]``."""
    if not 0 < low <= high:
        raise ValueError(f"need 0 < low <= high, got ({low}, {high})")
    rng = np.random.default_rng(seed)
    edges = g.sorted_edges()
    mags = rng.uniform(low, high, size=len(edges))
    signs = np.where(rng.random(len(edges)) < 0.5, -1.0, 1.0)
    return WeightedSCM(g, {e: float(s * m) for e, s, m in zip(edges, signs, mags)}, noise_scale)


def _sample_sem(scm: WeightedSCM, N: int, seed: int, quadratic: bool) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be at least 1")
    g = scm.graph
    order = topological_order(g)
    W = scm.weight_matrix()
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, scm.noise_scale, size=(N, g.n))
    for j in order:
        pa = list(g.parents(j))
        if not pa:
            continue
        P = X[:, pa]
        if quadratic:
            X[:, j] += np.clip((P * P) @ W[pa, j], -CLIP, CLIP)
            X[:, j] = np.clip(X[:, j], -CLIP, CLIP)
        else:
            X[:, j] += P @ W[pa, j]
    return X


def sample_linear_sem(scm: WeightedSCM, N: int, seed: int) -> np.ndarray:
    """``X_j = sum_i w_ij X_i + eps_j`` with Gaussian noise, shape ``(N, n)``."""
    return _sample_sem(scm, N, seed, quadratic=False)


def sample_quadratic_sem(scm: WeightedSCM, N: int, seed: int) -> np.ndarray:
    """``X_j = sum_i w_ij X_i**2 + eps_j``, clipped to ``[-1e6, 1e6]``."""
    return _sample_sem(scm, N, seed, quadratic=True)


def standardize(data) -> np.ndarray:
    """Center every column and scale it to unit sample standard deviation."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D array with at least two rows")
    for j in range(X.shape[1]):
        if X[:, j].max() == X[:, j].min():
            raise ZeroVarianceError(j)
    Xc = X - X.mean(axis=0)
    sd = Xc.std(axis=0, ddof=1)
    bad = np.flatnonzero(sd == 0)
    if bad.size:
        raise ZeroVarianceError(int(bad[0]))
    Z = Xc / sd
    # second pass removes the rounding left by the first
    return (Z - Z.mean(axis=0)) / Z.std(axis=0, ddof=1)
