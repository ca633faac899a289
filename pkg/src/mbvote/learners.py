"""Local structure learners run on each Markov-Blanket subgraph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._parallel import parallel_map
from .ci import MarkovBlanket
from .graph import Digraph, induced_subgraph, is_acyclic, to_global
from .synth import STAGE_SUBGRAPH, derive_seed
from .validation import check_data, check_probability


class LocalLearner(Protocol):
    def learn(self, data: Optional[np.ndarray], nodes: Sequence[int], seed: int) -> Digraph:
        """Return a digraph over ``len(nodes)`` local ids.

        ``data`` holds the subgraph's columns in the order of ``nodes``
        (global ids, ascending).
        """


class LearnerDivergedError(FloatingPointError):
    pass


class NoisyOracleLearner:
    """Corrupts the true induced subgraph with a binomial vote model.

    Each true edge is emitted with probability ``p`` (reversed with
    probability ``reverse_prob``); each ordered non-adjacent pair gets a
    spurious edge with probability ``q``.
    """

    def __init__(self, true_graph: Digraph, p: float = 1.0, q: float = 0.0,
                 reverse_prob: float = 0.0):
        check_probability(p, "p")
        check_probability(q, "q", upper_open=True)
        check_probability(reverse_prob, "reverse_prob", upper_open=True)
        if q > p:
            raise ValueError(f"need p >= q, got p={p}, q={q}")
        self.true_graph = true_graph
        self.p = p
        self.q = q
        self.reverse_prob = reverse_prob

    def learn(self, data, nodes, seed) -> Digraph:
        local, table = induced_subgraph(self.true_graph, nodes)
        k = local.n
        rng = np.random.default_rng(seed)
        edges = []
        for i in range(k):
            for j in range(i + 1, k):
                u1, u2 = rng.random(2)
                if (i, j) in local.edges or (j, i) in local.edges:
                    a, b = (i, j) if (i, j) in local.edges else (j, i)
                    if u1 < self.p:
                        edges.append((b, a) if u2 < self.reverse_prob else (a, b))
                else:
                    if u1 < self.q:
                        edges.append((i, j))
                    if u2 < self.q:
                        edges.append((j, i))
        return Digraph(k, edges)

    def __repr__(self):
        return (f"NoisyOracleLearner(p={self.p}, q={self.q}, "
                f"reverse_prob={self.reverse_prob})")


def noisy_oracle_learn(true_graph: Digraph, nodes, seed: int, p=1.0, q=0.0,
                       reverse_prob=0.0) -> Digraph:
    return NoisyOracleLearner(true_graph, p, q, reverse_prob).learn(None, nodes, seed)


def acyclicity(W: np.ndarray) -> tuple[float, np.ndarray]:
    """``h(W) = tr(exp(W * W)) - d`` and its gradient."""
    E = expm(W * W)
    return float(np.trace(E) - W.shape[0]), E.T * W * 2


def _prune_to_dag(W: np.ndarray) -> np.ndarray:
    """Drop the weakest edge lying on a cycle until the support is acyclic."""
    W = W.copy()
    while True:
        g = Digraph.from_adjacency(W != 0)
        if is_acyclic(g):
            return W
        reach = (np.linalg.matrix_power(np.eye(g.n) + (W != 0), g.n) > 0)
        on_cycle = [(abs(W[u, v]), u, v) for u, v in g.edges if reach[v, u]]
        _, u, v = min(on_cycle)
        W[u, v] = 0.0


class NotearsLite(BaseEstimator):
    """Linear NOTEARS with an L1 penalty, solved by an augmented Lagrangian.

    Parameters
    ----------
    lambda1 : float
        L1 penalty weight.
    w_threshold : float
        Entries with ``|W_ij| < w_threshold`` are dropped after fitting.
    max_outer : int
        Maximum number of dual (multiplier) updates.
    h_tol : float
        Stop once the acyclicity residual drops below this.
    inner_tol : float
        Inner stopping tolerance on the (projected or proximal) gradient norm.
    max_inner : int
        Cap on inner iterations per subproblem.
    rho_init, alpha_init, rho_max : float
        Initial penalty, initial multiplier, penalty ceiling.
    solver : {"lbfgs", "proximal"}
        Inner solver. ``"lbfgs"`` runs L-BFGS-B on the split positive and
        negative parts; ``"proximal"`` is accelerated proximal gradient with
        backtracking, much slower to reach the same tolerance.

    Attributes
    ----------
    W_raw_ : ndarray of shape (k, k)
        Solver output before thresholding.
    W_ : ndarray of shape (k, k)
        Thresholded weights whose support is a DAG.
    adjacency_ : ndarray of shape (k, k)
        Binary support of ``W_``.
    """

    def __init__(self, lambda1=0.1, w_threshold=0.3, max_outer=20, h_tol=1e-8,
                 inner_tol=1e-6, max_inner=2000, rho_init=1.0, alpha_init=0.0,
                 rho_max=1e16, solver="lbfgs"):
        self.lambda1 = lambda1
        self.w_threshold = w_threshold
        self.max_outer = max_outer
        self.h_tol = h_tol
        self.inner_tol = inner_tol
        self.max_inner = max_inner
        self.rho_init = rho_init
        self.alpha_init = alpha_init
        self.rho_max = rho_max
        self.solver = solver

    def _solve_lbfgs(self, S, W, rho, alpha, step):
        """L-BFGS-B on ``W = W+ - W-`` with ``W+, W- >= 0`` so the L1 term is linear."""
        k = S.shape[0]
        I = np.eye(k)
        off = ~np.eye(k, dtype=bool)

        def fun(w):
            Wp, Wm = w[: k * k].reshape(k, k), w[k * k:].reshape(k, k)
            V = Wp - Wm
            SR = S @ (I - V)
            h, gh = acyclicity(V)
            f = 0.5 * float(np.sum((I - V) * SR)) + 0.5 * rho * h * h + alpha * h
            f += self.lambda1 * float(w.sum())
            G = (rho * h + alpha) * gh - SR
            return f, np.concatenate([(G + self.lambda1).ravel(), (-G + self.lambda1).ravel()])

        # diagonal entries are pinned at zero through their bounds
        bounds = [(0, 0) if not o else (0, None) for o in np.tile(off.ravel(), 2)]
        w0 = np.concatenate([np.maximum(W, 0).ravel(), np.maximum(-W, 0).ravel()])
        res = minimize(fun, w0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"gtol": self.inner_tol, "maxiter": self.max_inner})
        if not np.all(np.isfinite(res.x)):
            raise LearnerDivergedError("inner solver returned non-finite weights")
        return res.x[: k * k].reshape(k, k) - res.x[k * k:].reshape(k, k), step

    def _solve_inner(self, S, W, rho, alpha, step):
        """Accelerated proximal gradient with backtracking and adaptive restart."""
        k = S.shape[0]
        I = np.eye(k)

        def smooth(W):
            # least-squares loss through the covariance S = X'X / N
            SR = S @ (I - W)
            loss = 0.5 * float(np.sum((I - W) * SR))
            h, gh = acyclicity(W)
            return loss + 0.5 * rho * h * h + alpha * h, (rho * h + alpha) * gh - SR

        def objective(W):
            return smooth(W)[0] + self.lambda1 * float(np.abs(W).sum())

        W_prev, momentum = W, 1.0
        F = objective(W)
        for _ in range(self.max_inner):
            Y = W + (momentum - 1) / (momentum + 2) * (W - W_prev) if momentum > 1 else W
            fy, gy = smooth(Y)
            while True:
                Z = Y - step * gy
                W_new = np.sign(Z) * np.maximum(np.abs(Z) - step * self.lambda1, 0.0)
                np.fill_diagonal(W_new, 0.0)
                D = W_new - Y
                f_new = smooth(W_new)[0]
                bound = fy + float(np.sum(gy * D)) + float(np.sum(D * D)) / (2 * step)
                if np.isfinite(f_new) and f_new <= bound + 1e-12 * abs(fy):
                    break
                step *= 0.5
                if step < 1e-20:
                    # no representable descent step: numerically stationary
                    return W, 1.0
            F_new = f_new + self.lambda1 * float(np.abs(W_new).sum())
            if F_new > F:
                momentum = 1.0  # restart from the last iterate
                W_prev = W
                continue
            gap = np.linalg.norm(W_new - W) / step
            W_prev, W, F = W, W_new, F_new
            momentum += 1.0
            if gap < self.inner_tol:
                break
            step = min(step * 1.25, 1.0)
        return W, step

    def fit(self, X, y=None):
        with np.errstate(over="ignore", invalid="ignore"):
            return self._fit(check_data(X, min_samples=2))

    def _fit(self, X):
        X = X - X.mean(axis=0)
        S = X.T @ X / X.shape[0]
        k = X.shape[1]
        W = np.zeros((k, k))
        if self.solver not in ("lbfgs", "proximal"):
            raise ValueError(f"solver must be 'lbfgs' or 'proximal', got {self.solver!r}")
        solve = self._solve_lbfgs if self.solver == "lbfgs" else self._solve_inner
        rho, alpha, h = float(self.rho_init), float(self.alpha_init), np.inf
        step = 1.0
        for _ in range(self.max_outer):
            while True:
                W_new, step = solve(S, W, rho, alpha, step)
                h_new, _ = acyclicity(W_new)
                if not np.isfinite(h_new):
                    raise LearnerDivergedError("acyclicity residual is not finite")
                if h_new > 0.25 * h and rho < self.rho_max:
                    rho *= 10
                else:
                    break
            W, h = W_new, h_new
            alpha += rho * h
            if h <= self.h_tol or rho >= self.rho_max:
                break
        self.W_raw_ = W
        W = np.where(np.abs(W) < self.w_threshold, 0.0, W)
        self.W_ = _prune_to_dag(W)
        self.adjacency_ = (self.W_ != 0).astype(np.int8)
        return self

    @property
    def graph_(self) -> Digraph:
        check_is_fitted(self, "W_")
        return Digraph.from_adjacency(self.adjacency_)

    def learn(self, data, nodes, seed) -> Digraph:
        if len(nodes) == 1:
            return Digraph(1)
        return self.fit(data).graph_


def drop_bidirected(g: Digraph) -> Digraph:
    """Remove both edges of every 2-cycle (no directional vote)."""
    return Digraph(g.n, (e for e in g.edges if (e[1], e[0]) not in g.edges))


@dataclass(frozen=True)
class LocalGraph:
    center: int
    nodes: tuple
    graph: Digraph
    error: Optional[str] = None

    def global_edges(self) -> list[tuple[int, int]]:
        return sorted((self.nodes[u], self.nodes[v]) for u, v in self.graph.edges)


class _SubgraphTask:
    def __init__(self, learner):
        self.learner = learner

    def __call__(self, item):
        _, nodes, block, seed = item
        g = self.learner.learn(block, nodes, seed)
        if g.n != len(nodes):
            raise ValueError(f"learner returned {g.n} nodes, expected {len(nodes)}")
        return drop_bidirected(g)


def learn_all_subgraphs(learner: LocalLearner, blankets: Sequence[MarkovBlanket],
                        data: Optional[np.ndarray] = None, master_seed: int = 0,
                        n_jobs: int = 1) -> list[LocalGraph]:
    """Learn one local graph on ``{v} U MB(v)`` for every blanket.

    A learner failure leaves an empty local graph with ``error`` set; the
    remaining subgraphs are unaffected.
    """
    items = []
    for mb in blankets:
        nodes = tuple(sorted(mb.members | {mb.target}))
        block = None if data is None else np.ascontiguousarray(data[:, list(nodes)])
        items.append((mb.target, nodes, block, derive_seed(master_seed, STAGE_SUBGRAPH, mb.target)))
    results = parallel_map(_SubgraphTask(learner), items, n_jobs)
    out = []
    for (v, nodes, _, _), (ok, val) in zip(items, results):
        if ok:
            out.append(LocalGraph(v, nodes, val))
        else:
            out.append(LocalGraph(v, nodes, Digraph(len(nodes)), error=val))
    return out


def local_graphs_to_global(local_graphs: Sequence[LocalGraph], n: int) -> list[Digraph]:
    return [to_global(lg.graph, lg.nodes, n) for lg in local_graphs]
