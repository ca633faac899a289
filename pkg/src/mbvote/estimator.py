"""Scikit-learn style front end for Markov-Blanket divide-and-vote structure learning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ci import FisherZ, GrowShrink, OracleMB, all_markov_blankets
from .graph import Digraph
from .learners import NoisyOracleLearner, NotearsLite, learn_all_subgraphs
from .validation import check_data
from .voting import MergeResult, VotingParams, merge_tally, tally_votes

LEARNERS = ("oracle", "noisy-oracle", "notears-lite")
MB_ESTIMATORS = ("oracle", "grow-shrink")


def _need_oracle(graph, what):
    if graph is None:
        raise ValueError(f"{what} requires oracle_graph")
    return graph


def make_learner(learner, oracle_graph=None, params=None):
    """Resolve a learner name (or pass an instance through)."""
    params = dict(params or {})
    if not isinstance(learner, str):
        return learner
    if learner == "oracle":
        return NoisyOracleLearner(_need_oracle(oracle_graph, "oracle learner"))
    if learner == "noisy-oracle":
        return NoisyOracleLearner(_need_oracle(oracle_graph, "noisy-oracle learner"), **params)
    if learner == "notears-lite":
        return NotearsLite(**params)
    raise ValueError(f"unknown learner {learner!r}; choose from {LEARNERS}")


def make_mb_estimator(kind, X, n, oracle_graph=None, ci_alpha=0.01):
    """Resolve a blanket estimator name (or pass a callable through)."""
    if callable(kind):
        return kind
    if kind == "oracle":
        return OracleMB(_need_oracle(oracle_graph, "oracle blanket estimator"))
    if kind == "grow-shrink":
        if X is None:
            raise ValueError("grow-shrink needs data")
        return GrowShrink(FisherZ(X, ci_alpha), n)
    raise ValueError(f"unknown mb_estimator {kind!r}; choose from {MB_ESTIMATORS}")


class MBVoteDiscovery(BaseEstimator):
    """Learn a DAG by voting over local graphs learned on Markov-Blanket subgraphs.

    Parameters
    ----------
    learner : {"oracle", "noisy-oracle", "notears-lite"} or object with ``learn``
        Local learner applied to every ``{v} U MB(v)`` subgraph.
    mb_estimator : {"grow-shrink", "oracle"} or callable ``v -> MarkovBlanket``
    ci_alpha : float
        Fisher-z significance level for Grow-Shrink.
    voting : {"weighted", "naive"}
    lam : float
        Confidence-weight rate of weighted voting.
    threshold : float
        Final score threshold in (0, 1).
    oracle_graph : Digraph, optional
        Ground truth; required by the oracle blanket estimator and the oracle learners.
    learner_params : dict, optional
        ``p, q, reverse_prob`` for the noisy oracle, or NotearsLite keyword arguments.
    symmetrize_mb : bool
        OR-symmetrize estimated blankets before learning.
    n_jobs : int
        Worker processes for the blanket and subgraph stages.
    random_state : int
        Master seed; per-subgraph seeds are derived from it and the node id.

    Attributes
    ----------
    blankets_ : list of MarkovBlanket
    local_graphs_ : list of LocalGraph
    tally_ : VoteTally
    merge_result_ : MergeResult
    graph_ : Digraph
    adjacency_matrix_ : ndarray of shape (n_features, n_features)
    """

    def __init__(self, learner="notears-lite", mb_estimator="grow-shrink", ci_alpha=0.01,
                 voting="weighted", lam=0.5, threshold=0.7, oracle_graph=None,
                 learner_params=None, symmetrize_mb=False, n_jobs=1, random_state=0):
        self.learner = learner
        self.mb_estimator = mb_estimator
        self.ci_alpha = ci_alpha
        self.voting = voting
        self.lam = lam
        self.threshold = threshold
        self.oracle_graph = oracle_graph
        self.learner_params = learner_params
        self.symmetrize_mb = symmetrize_mb
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _make_learner(self):
        return make_learner(self.learner, self.oracle_graph, self.learner_params)

    def _make_mb(self, X, n):
        return make_mb_estimator(self.mb_estimator, X, n, self.oracle_graph, self.ci_alpha)

    def _params(self, lam=None, threshold=None, voting=None) -> VotingParams:
        return VotingParams(self.lam if lam is None else lam,
                            self.threshold if threshold is None else threshold,
                            self.voting if voting is None else voting)

    def fit(self, X=None, y=None):
        """Run the divide, learn and merge stages.

        ``X`` may be omitted only when both stages use the oracle.
        """
        params = self._params()
        if X is not None:
            X = check_data(X, min_samples=2)
            n = X.shape[1]
            if self.oracle_graph is not None and self.oracle_graph.n != n:
                raise ValueError("oracle_graph size does not match the data")
        else:
            n = _need_oracle(self.oracle_graph, "fitting without data").n
        learner = self._make_learner()
        if X is None and not isinstance(learner, NoisyOracleLearner):
            raise ValueError("data-driven learners need X")
        self.n_features_in_ = n
        self.blankets_ = all_markov_blankets(self._make_mb(X, n), n, self.n_jobs, self.symmetrize_mb)
        self.local_graphs_ = learn_all_subgraphs(learner, self.blankets_, X,
                                                 self.random_state, self.n_jobs)
        self.tally_ = tally_votes(self.local_graphs_, n)
        self.merge_result_ = merge_tally(self.tally_, params)
        return self

    def remerge(self, lam=None, threshold=None, voting=None) -> MergeResult:
        """Merge the cached tally under new voting parameters; no relearning."""
        check_is_fitted(self, "tally_")
        return merge_tally(self.tally_, self._params(lam, threshold, voting))

    @property
    def graph_(self) -> Digraph:
        check_is_fitted(self, "merge_result_")
        return self.merge_result_.dag

    @property
    def adjacency_matrix_(self) -> np.ndarray:
        return self.graph_.to_adjacency()

    @property
    def failed_subgraphs_(self) -> dict:
        check_is_fitted(self, "local_graphs_")
        return {lg.center: lg.error for lg in self.local_graphs_ if lg.error}
