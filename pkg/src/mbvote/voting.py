"""Vote tallies, naive/weighted edge scores and the merge into a single DAG."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fas import FasResult, break_cycles
from .graph import Digraph, WeightedDigraph
from .learners import LocalGraph
from .validation import check_positive, check_threshold

MODES = ("naive", "weighted")
VIABILITY_TOL = 1e-12


@dataclass(frozen=True)
class VoteTally:
    """Directional vote counts; ``edge_count[i, j]`` subgraphs emitted ``i -> j``."""

    edge_count: np.ndarray

    def __post_init__(self):
        A = np.array(self.edge_count, dtype=np.int64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("edge_count must be square")
        if (A < 0).any():
            raise ValueError("edge_count must be non-negative")
        if np.diagonal(A).any():
            raise ValueError("edge_count diagonal must be zero")
        A.setflags(write=False)
        object.__setattr__(self, "edge_count", A)

    @property
    def n(self) -> int:
        return self.edge_count.shape[0]

    @property
    def occurrence(self) -> np.ndarray:
        return self.edge_count + self.edge_count.T

    def min_occurrence(self) -> int:
        """Smallest nonzero pair occurrence, 0 for an empty tally."""
        m = self.occurrence
        return int(m[m > 0].min()) if (m > 0).any() else 0

    def summary(self) -> dict:
        m = np.triu(self.occurrence, 1)
        seen = m[m > 0]
        return {
            "n": self.n,
            "total_votes": int(self.edge_count.sum()),
            "pairs_with_votes": int(seen.size),
            "min_occurrence": int(seen.min()) if seen.size else 0,
            "max_occurrence": int(seen.max()) if seen.size else 0,
            "mean_occurrence": float(seen.mean()) if seen.size else 0.0,
        }


@dataclass(frozen=True)
class VotingParams:
    lam: float = 0.5
    threshold: float = 0.7
    mode: str = "weighted"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        check_threshold(self.threshold)
        if self.mode == "weighted":
            check_positive(self.lam, "lam")


def tally_votes(local_graphs: Sequence[LocalGraph], n: int) -> VoteTally:
    A = np.zeros((n, n), dtype=np.int64)
    for lg in local_graphs:
        if len(lg.nodes) != lg.graph.n:
            raise ValueError(f"id map of subgraph {lg.center} does not match its node count")
        if any(not 0 <= v < n for v in lg.nodes):
            raise ValueError(f"subgraph {lg.center} maps outside 0..{n - 1}")
        for u, v in lg.global_edges():
            A[u, v] += 1
    return VoteTally(A)


def naive_scores(tally: VoteTally) -> np.ndarray:
    """``A_ij / m_ij``, zero where the pair has no votes."""
    A = tally.edge_count.astype(float)
    m = tally.occurrence.astype(float)
    out = np.zeros_like(A)
    np.divide(A, m, out=out, where=m > 0)
    return out


def confidence_weight(m, lam: float):
    """``1 - exp(-lam * m)``."""
    return -np.expm1(-lam * np.asarray(m, dtype=float))


def weighted_scores(tally: VoteTally, lam: float) -> np.ndarray:
    """``(1 - exp(-lam * m_ij)) * A_ij / m_ij``, zero where ``m_ij = 0``."""
    check_positive(lam, "lam")
    return confidence_weight(tally.occurrence, lam) * naive_scores(tally)


def pseudo_count_kappa(m, lam: float):
    """Data-dependent Beta pseudo-count ``m e^{-lam m} / (1 - e^{-lam m})``.

    ``A / (m + kappa)`` equals the weighted score.
    """
    m = np.asarray(m, dtype=float)
    if np.any(m < 1):
        raise ValueError("m must be at least 1")
    check_positive(lam, "lam")
    k = m * np.exp(-lam * m) / -np.expm1(-lam * m)
    return float(k) if k.ndim == 0 else k


@dataclass(frozen=True)
class MergeResult:
    dag: Digraph
    merged: WeightedDigraph
    scores: np.ndarray
    fas: FasResult
    removed_by_threshold: list = field(default_factory=list)

    @property
    def diagnostics(self) -> dict:
        positive = self.scores[self.scores > 0]
        hist, edges = np.histogram(positive, bins=10, range=(0.0, 1.0))
        return {
            "edges_merged": len(self.merged.weights),
            "edges_removed_by_fas": len(self.fas.removed_edges),
            "edges_removed_by_threshold": len(self.removed_by_threshold),
            "edges_final": self.dag.num_edges,
            "score_histogram": {"bin_edges": edges.tolist(), "counts": hist.tolist()},
        }


def merge_tally(tally: VoteTally, params: VotingParams) -> MergeResult:
    """Score, break cycles on every positive-score edge, then filter by threshold.

    An edge survives when its score is at least ``t`` and, in weighted mode,
    its pair's confidence weight ``1 - exp(-lam m)`` exceeds ``t`` by more than
    ``VIABILITY_TOL``.
    The second condition only bites at ``lam = lam_min(m)``, where a fully
    supported edge would otherwise tie ``t`` exactly.
    """
    if params.mode == "weighted":
        S = weighted_scores(tally, params.lam)
        # a pair whose confidence weight cannot exceed t is unviable (r(m) >= 1);
        # the margin absorbs rounding when lam sits on lam_min(m)
        viable = confidence_weight(tally.occurrence, params.lam) > params.threshold + VIABILITY_TOL
    else:
        S = naive_scores(tally)
        viable = np.ones_like(S, dtype=bool)
    rows, cols = np.nonzero(S > 0)
    merged = WeightedDigraph(tally.n, {(int(u), int(v)): float(S[u, v]) for u, v in zip(rows, cols)})
    fas = break_cycles(merged)
    kept, dropped = [], []
    for u, v in sorted(fas.dag.edges):
        (kept if S[u, v] >= params.threshold and viable[u, v] else dropped).append((u, v))
    return MergeResult(Digraph(tally.n, kept), merged, S, fas,
                       [(u, v, float(S[u, v])) for u, v in dropped])


def merge(local_graphs: Sequence[LocalGraph], n: int, params: VotingParams) -> MergeResult:
    return merge_tally(tally_votes(local_graphs, n), params)
