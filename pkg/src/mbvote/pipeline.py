"""End-to-end runs: data, blankets, local learning, voting, evaluation, artifacts."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .ci import all_markov_blankets
from .estimator import LEARNERS, MB_ESTIMATORS, make_learner, make_mb_estimator
from .graph import Digraph
from .learners import learn_all_subgraphs
from .metrics import evaluate
from .synth import (STAGE_GRAPH, STAGE_NOISE, STAGE_WEIGHTS, derive_seed, gen_er_dag,
                    gen_sf_dag, sample_linear_sem, sample_quadratic_sem, sample_weights,
                    standardize)
from .voting import MODES, VoteTally, VotingParams, merge_tally, tally_votes

log = logging.getLogger(__name__)

# fields that do not influence the vote tally
_DOWNSTREAM = {"voting", "lam", "threshold", "jobs", "out"}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    n: int = 20
    graph_family: str = "ER"
    h: float = 3.0
    num_samples: int = 1000
    noise_scale: float = 1.0
    sem: str = "linear"
    standardize: bool = True
    weight_low: float = 0.5
    weight_high: float = 2.0
    mb_estimator: str = "grow-shrink"
    ci_alpha: float = 0.01
    symmetrize_mb: bool = False
    learner: str = "notears-lite"
    p: float = 0.9
    q: float = 0.02
    reverse_prob: float = 0.0
    tau: float = 0.1
    omega: float = 0.3
    voting: str = "weighted"
    lam: float = 0.5
    threshold: float = 0.7
    master_seed: int = 0
    jobs: int = 1
    out: Optional[str] = None
    data_path: Optional[str] = None
    truth_path: Optional[str] = None

    def __post_init__(self):
        if self.graph_family.upper() not in ("ER", "SF"):
            raise ValueError(f"graph_family must be ER or SF, got {self.graph_family!r}")
        if self.sem not in ("linear", "quadratic"):
            raise ValueError(f"sem must be linear or quadratic, got {self.sem!r}")
        if self.mb_estimator not in MB_ESTIMATORS:
            raise ValueError(f"mb_estimator must be one of {MB_ESTIMATORS}")
        if self.learner not in LEARNERS:
            raise ValueError(f"learner must be one of {LEARNERS}")
        if self.voting not in MODES:
            raise ValueError(f"voting must be one of {MODES}")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        VotingParams(self.lam, self.threshold, self.voting)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "PipelineConfig":
        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})

    def upstream_hash(self) -> str:
        """Hash of every field that affects the vote tally."""
        up = {k: v for k, v in self.to_dict().items() if k not in _DOWNSTREAM}
        return hashlib.sha256(json.dumps(up, sort_keys=True).encode()).hexdigest()[:16]

    def voting_params(self) -> VotingParams:
        return VotingParams(self.lam, self.threshold, self.voting)

    def learner_params(self) -> dict:
        if self.learner == "noisy-oracle":
            return {"p": self.p, "q": self.q, "reverse_prob": self.reverse_prob}
        if self.learner == "notears-lite":
            return {"lambda1": self.tau, "w_threshold": self.omega}
        return {}

    @property
    def needs_data(self) -> bool:
        return self.mb_estimator != "oracle" or self.learner == "notears-lite"


@dataclass
class RunReport:
    config: dict
    config_hash: str
    stage_times: dict = field(default_factory=dict)
    mb_stats: dict = field(default_factory=dict)
    tally_summary: dict = field(default_factory=dict)
    fas: dict = field(default_factory=dict)
    metrics: Optional[dict] = None
    artifacts: dict = field(default_factory=dict)
    failed_subgraphs: dict = field(default_factory=dict)
    # in-memory results, not serialized
    truth: Optional[Digraph] = field(default=None, repr=False)
    tally: Optional[VoteTally] = field(default=None, repr=False)
    final: Optional[Digraph] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        keys = ("config", "config_hash", "stage_times", "mb_stats", "tally_summary",
                "fas", "metrics", "artifacts", "failed_subgraphs")
        return {k: getattr(self, k) for k in keys}


class _Stage:
    def __init__(self, report: RunReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report.stage_times[self.name] = time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def generate_truth(config: PipelineConfig) -> Digraph:
    seed = derive_seed(config.master_seed, STAGE_GRAPH)
    if config.n == 1:
        return Digraph(1)
    gen = gen_er_dag if config.graph_family.upper() == "ER" else gen_sf_dag
    return gen(config.n, min(config.h, config.n - 1), seed)


def generate_data(config: PipelineConfig, truth: Digraph):
    scm = sample_weights(truth, config.weight_low, config.weight_high,
                         derive_seed(config.master_seed, STAGE_WEIGHTS), config.noise_scale)
    sampler = sample_linear_sem if config.sem == "linear" else sample_quadratic_sem
    X = sampler(scm, config.num_samples, derive_seed(config.master_seed, STAGE_NOISE))
    if config.standardize:
        X = standardize(X)
    return scm, X


def _mb_stats(blankets) -> dict:
    sizes = [len(mb.members) for mb in blankets]
    return {"mean_size": float(np.mean(sizes)) if sizes else 0.0,
            "max_size": int(max(sizes, default=0)), "min_size": int(min(sizes, default=0))}


def run_pipeline(config: PipelineConfig, truth: Optional[Digraph] = None,
                 data: Optional[np.ndarray] = None) -> RunReport:
    """Run every stage; artifacts are written under ``config.out`` as they complete.

    The result depends only on the config (and supplied truth/data), never
    on ``config.jobs``.
    """
    report = RunReport(config.to_dict(), config.upstream_hash())
    out = Path(config.out) if config.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    def save(name, writer, *args):
        if out:
            writer(out / name, *args)
            report.artifacts[name] = str(out / name)

    with _Stage(report, "generate"):
        if truth is None and config.truth_path:
            truth = io.read_edges_tsv(config.truth_path)
            truth = getattr(truth, "digraph", truth)
        if data is None and config.data_path:
            data = io.read_data_csv(config.data_path)
            if config.standardize:
                data = standardize(data)
        if truth is None and data is None:
            truth = generate_truth(config)
        if data is None and config.needs_data:
            if truth is None:
                raise ValueError("no data and no ground truth to simulate from")
            scm, data = generate_data(config, truth)
            save("scm.tsv", io.write_scm, scm, config.master_seed)
            save("data.csv", io.write_data_csv, data)
        if truth is not None:
            save("truth.tsv", io.write_edges_tsv, truth)
        n = data.shape[1] if data is not None else truth.n
    report.truth = truth

    with _Stage(report, "mb"):
        estimator = make_mb_estimator(config.mb_estimator, data, n, truth, config.ci_alpha)
        blankets = all_markov_blankets(estimator, n, config.jobs, config.symmetrize_mb)
        report.mb_stats = _mb_stats(blankets)
        save("mb.json", io.write_blankets_json, blankets)

    with _Stage(report, "learn"):
        learner = make_learner(config.learner, truth, config.learner_params())
        local_graphs = learn_all_subgraphs(learner, blankets, data, config.master_seed, config.jobs)
        report.failed_subgraphs = {lg.center: lg.error for lg in local_graphs if lg.error}
        tally = tally_votes(local_graphs, n)
        report.tally = tally
        report.tally_summary = tally.summary()
        save("locals.json", io.write_locals_json, local_graphs)
        save("votes.csv", io.write_tally_csv, tally, report.config_hash)

    with _Stage(report, "merge"):
        result = merge_tally(tally, config.voting_params())
        report.final = result.dag
        report.fas = result.diagnostics
        save("merged.tsv", io.write_edges_tsv, result.merged)
        save("final.tsv", io.write_edges_tsv, result.dag)
        save("fas.json", io.write_fas_json, result.fas)

    if truth is not None:
        with _Stage(report, "evaluate"):
            report.metrics = evaluate(result.dag, truth)

    if out:
        report.artifacts["report.json"] = str(out / "report.json")
        io._write_json(out / "report.json", report.to_dict())
    return report


SWEEP_COLUMNS = ("lambda", "precision", "recall", "fdr", "tpr", "f1", "shd")


def sweep_rows(tally: VoteTally, truth: Digraph, grid: Sequence[float], threshold: float) -> list[dict]:
    """Re-merge one cached tally for every lambda in ``grid``."""
    rows = []
    for lam in grid:
        m = evaluate(merge_tally(tally, VotingParams(float(lam), threshold, "weighted")).dag, truth)
        rows.append({"lambda": float(lam), **{k: m[k] for k in SWEEP_COLUMNS[1:]}})
    return rows


def _cached_tally(config: PipelineConfig):
    if not config.out:
        return None
    votes, truth = Path(config.out) / "votes.csv", Path(config.out) / "truth.tsv"
    if not (votes.exists() and truth.exists()):
        return None
    tally, h = io.read_tally_csv(votes)
    if h != config.upstream_hash():
        return None
    g = io.read_edges_tsv(truth)
    return tally, getattr(g, "digraph", g)


def sweep_lambda(config: PipelineConfig, grid: Sequence[float], truth: Optional[Digraph] = None,
                 data: Optional[np.ndarray] = None) -> list[dict]:
    """Precision/recall/SHD for each lambda from a single learning pass.

    Reuses ``votes.csv`` under ``config.out`` when its config hash matches.
    """
    if not len(grid):
        raise ValueError("lambda grid is empty")
    cached = _cached_tally(config) if truth is None and data is None else None
    if cached is None:
        report = run_pipeline(config.replace(lam=float(grid[0]), voting="weighted"), truth, data)
        if report.truth is None:
            raise ValueError("sweeping needs a ground-truth graph")
        tally, truth = report.tally, report.truth
    else:
        tally, truth = cached
    rows = sweep_rows(tally, truth, grid, config.threshold)
    if config.out:
        lines = [",".join(SWEEP_COLUMNS)]
        lines += [",".join(repr(r[c]) for c in SWEEP_COLUMNS) for r in rows]
        io._write_atomic(Path(config.out) / "sweep.csv", "\n".join(lines) + "\n")
    return rows
