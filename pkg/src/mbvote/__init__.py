"""Divide-and-vote causal structure learning over Markov-blanket subgraphs."""

from .ci import (FisherZ, GrowShrink, MarkovBlanket, OracleMB, all_markov_blankets, d_separated,
                 fisher_z_test, grow_shrink_mb, oracle_mb, partial_correlation)
from .estimator import MBVoteDiscovery
from .fas import FasResult, break_cycles, greedy_order
from .graph import (CyclicGraphError, Digraph, WeightedDigraph, edge_union, induced_subgraph,
                    is_acyclic, topological_order)
from .learners import LocalGraph, NoisyOracleLearner, NotearsLite, learn_all_subgraphs
from .metrics import Confusion, confusion, evaluate
from .pipeline import PipelineConfig, PipelineError, RunReport, run_pipeline, sweep_lambda
from .synth import (WeightedSCM, gen_er_dag, gen_sf_dag, sample_linear_sem, sample_quadratic_sem,
                    sample_weights, standardize)
from .voting import (MergeResult, VoteTally, VotingParams, merge, merge_tally, naive_scores,
                     pseudo_count_kappa, tally_votes, weighted_scores)

__version__ = "0.1.0"

__all__ = [
    "CyclicGraphError", "Digraph", "WeightedDigraph", "edge_union", "induced_subgraph",
    "is_acyclic", "topological_order",
    "WeightedSCM", "gen_er_dag", "gen_sf_dag", "sample_linear_sem", "sample_quadratic_sem",
    "sample_weights", "standardize",
    "FisherZ", "GrowShrink", "MarkovBlanket", "OracleMB", "all_markov_blankets", "d_separated",
    "fisher_z_test", "grow_shrink_mb", "oracle_mb", "partial_correlation",
    "LocalGraph", "NoisyOracleLearner", "NotearsLite", "learn_all_subgraphs",
    "MergeResult", "VoteTally", "VotingParams", "merge", "merge_tally", "naive_scores",
    "pseudo_count_kappa", "tally_votes", "weighted_scores",
    "FasResult", "break_cycles", "greedy_order",
    "Confusion", "confusion", "evaluate",
    "MBVoteDiscovery",
    "PipelineConfig", "PipelineError", "RunReport", "run_pipeline", "sweep_lambda",
]
