"""Conditional-independence tests and Markov-Blanket discovery."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import norm

from ._parallel import parallel_map
from .graph import CyclicGraphError, Digraph

RHO_CLAMP = 1 - 1e-12

CITest = Callable[[int, int, frozenset], bool]


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


class MarkovBlanketError(RuntimeError):
    """One or more per-node blanket estimates failed."""

    def __init__(self, failures: dict):
        self.failures = failures
        detail = "; ".join(f"node {v}: {e}" for v, e in sorted(failures.items()))
        super().__init__(f"Markov blanket estimation failed ({detail})")


@dataclass(frozen=True)
class CITestResult:
    statistic: float
    p_value: float
    independent: bool


@dataclass(frozen=True)
class MarkovBlanket:
    target: int
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(u) for u in self.members))
        if self.target in self.members:
            raise ValueError("target cannot be a member of its own blanket")


def _partial_corr_from_corr(C: np.ndarray, x: int, y: int, Z: Sequence[int]) -> float:
    if not Z:
        return float(C[x, y])
    Z = list(Z)
    ab = [x, y]
    Czz = C[np.ix_(Z, Z)]
    Cza = C[np.ix_(Z, ab)]
    try:
        L = np.linalg.cholesky(Czz)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(f"conditioning set {Z} is singular") from None
    K = np.linalg.solve(L, Cza)
    S = C[np.ix_(ab, ab)] - K.T @ K
    if S[0, 0] <= 1e-14 or S[1, 1] <= 1e-14:
        raise SingularCovarianceError(f"variables ({x}, {y}) are determined by {Z}")
    return float(S[0, 1] / math.sqrt(S[0, 0] * S[1, 1]))


def _check_args(n: int, N: int, x: int, y: int, Z) -> list[int]:
    Z = sorted(int(z) for z in Z)
    if x == y or x in Z or y in Z:
        raise ValueError("x, y must be distinct and outside the conditioning set")
    for v in (x, y, *Z):
        if not 0 <= v < n:
            raise ValueError(f"variable {v} out of range")
    if N <= len(Z) + 3:
        raise ValueError(f"need more than {len(Z) + 3} samples, got {N}")
    return Z


def partial_correlation(data, x: int, y: int, Z: Iterable[int] = ()) -> float:
    """Sample partial correlation of columns ``x`` and ``y`` given ``Z``.

    Clamped to ``[-1 + 1e-12, 1 - 1e-12]``.
    """
    X = np.asarray(data, dtype=float)
    Z = _check_args(X.shape[1], X.shape[0], x, y, Z)
    cols = [x, y, *Z]
    C = np.corrcoef(X[:, cols], rowvar=False)
    rho = _partial_corr_from_corr(C, 0, 1, list(range(2, len(cols))))
    return float(np.clip(rho, -RHO_CLAMP, RHO_CLAMP))


def _fisher_z(rho: float, N: int, k: int, alpha: float) -> CITestResult:
    stat = math.sqrt(N - k - 3) * math.atanh(rho)
    p = float(min(1.0, 2 * norm.sf(abs(stat))))
    return CITestResult(stat, p, p > alpha)


def fisher_z_test(data, x: int, y: int, Z: Iterable[int] = (), alpha: float = 0.01) -> CITestResult:
    """Fisher-z test of ``x _||_ y | Z``; independence is accepted when ``p > alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    Z = list(Z)
    rho = partial_correlation(data, x, y, Z)
    return _fisher_z(rho, np.shape(data)[0], len(Z), alpha)


class FisherZ:
    """Picklable Fisher-z CI predicate with a cached correlation matrix."""

    def __init__(self, data, alpha: float = 0.01):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        X = np.asarray(data, dtype=float)
        self.N, self.n = X.shape
        self.alpha = alpha
        self.corr = np.corrcoef(X, rowvar=False).reshape(self.n, self.n)

    def test(self, x: int, y: int, Z=()) -> CITestResult:
        Z = _check_args(self.n, self.N, x, y, Z)
        rho = np.clip(_partial_corr_from_corr(self.corr, x, y, Z), -RHO_CLAMP, RHO_CLAMP)
        return _fisher_z(float(rho), self.N, len(Z), self.alpha)

    def __call__(self, x: int, y: int, Z=()) -> bool:
        return self.test(x, y, Z).independent


def d_separated(g: Digraph, x: int, y: int, Z: Iterable[int] = ()) -> bool:
    """True iff ``x`` and ``y`` are d-separated given ``Z`` in the DAG ``g``.

    Reachability over active trails (Bayes ball): a visit is a node plus the
    direction it was entered from.
    """
    if not g.is_dag:
        raise CyclicGraphError("d-separation needs an acyclic graph")
    Z = {int(z) for z in Z}
    if x == y or x in Z or y in Z:
        raise ValueError("x, y must be distinct and outside the conditioning set")

    # nodes with a descendant in Z (Z included) can open colliders
    anc_z = set(Z)
    stack = list(Z)
    while stack:
        for u in g.parents(stack.pop()):
            if u not in anc_z:
                anc_z.add(u)
                stack.append(u)

    UP, DOWN = 0, 1  # UP: arrived from a child; DOWN: arrived from a parent
    seen = set()
    queue = deque([(x, UP)])
    while queue:
        v, d = queue.popleft()
        if (v, d) in seen:
            continue
        seen.add((v, d))
        if v == y:
            return False
        if d == UP and v not in Z:
            queue.extend((u, UP) for u in g.parents(v))
            queue.extend((c, DOWN) for c in g.children(v))
        elif d == DOWN:
            if v not in Z:
                queue.extend((c, DOWN) for c in g.children(v))
            if v in anc_z:
                queue.extend((u, UP) for u in g.parents(v))
    return True


class DSeparationOracle:
    """CI predicate answering by d-separation in a known DAG."""

    def __init__(self, graph: Digraph):
        self.graph = graph

    def __call__(self, x: int, y: int, Z=()) -> bool:
        return d_separated(self.graph, x, y, Z)


def oracle_mb(g: Digraph, v: int) -> MarkovBlanket:
    """Parents, children and spouses of ``v``."""
    if not g.is_dag:
        raise CyclicGraphError("oracle blanket needs an acyclic graph")
    members = set(g.parents(v)) | set(g.children(v))
    for c in g.children(v):
        members.update(g.parents(c))
    members.discard(v)
    return MarkovBlanket(v, members)


def grow_shrink_mb(ci: CITest, n: int, v: int) -> MarkovBlanket:
    """Grow-Shrink blanket of ``v`` with candidates scanned in ascending id."""
    S: list[int] = []
    changed = True
    while changed:
        changed = False
        for u in range(n):
            if u == v or u in S:
                continue
            if not ci(v, u, frozenset(S)):
                S.append(u)
                changed = True
    changed = True
    while changed:
        changed = False
        for u in sorted(S):
            rest = frozenset(S) - {u}
            if ci(v, u, rest):
                S.remove(u)
                changed = True
    return MarkovBlanket(v, S)


class OracleMB:
    def __init__(self, graph: Digraph):
        self.graph = graph

    def __call__(self, v: int) -> MarkovBlanket:
        return oracle_mb(self.graph, v)


class GrowShrink:
    def __init__(self, ci: CITest, n: int):
        self.ci = ci
        self.n = n

    def __call__(self, v: int) -> MarkovBlanket:
        return grow_shrink_mb(self.ci, self.n, v)


def all_markov_blankets(estimator: Callable[[int], MarkovBlanket], n: int,
                        n_jobs: int = 1, symmetrize: bool = False) -> list[MarkovBlanket]:
    """Run ``estimator`` on every node; failures are collected and raised together.

    With ``symmetrize`` the blankets are OR-symmetrized (``u in MB(v)`` or
    ``v in MB(u)`` puts each in the other's blanket).
    """
    results = parallel_map(estimator, range(n), n_jobs)
    failures = {v: err for v, (ok, err) in enumerate(results) if not ok}
    if failures:
        raise MarkovBlanketError(failures)
    blankets = [mb for _, mb in results]
    if symmetrize:
        members = [set(mb.members) for mb in blankets]
        for mb in blankets:
            for u in mb.members:
                members[u].add(mb.target)
        blankets = [MarkovBlanket(v, members[v]) for v in range(n)]
    return blankets
