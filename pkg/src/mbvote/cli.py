"""Command-line interface.

Every stage reads and writes files under ``--out`` so stages can be chained::

    mbvote generate --out run
    mbvote mb --out run
    mbvote learn --out run
    mbvote merge --out run --lambda 0.5
    mbvote eval --est run/final.tsv --truth run/truth.tsv

Exit codes: 0 success, 1 usage error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, theory
from .ci import all_markov_blankets
from .estimator import make_learner, make_mb_estimator
from .learners import learn_all_subgraphs
from .metrics import evaluate
from .pipeline import PipelineConfig, PipelineError, generate_data, generate_truth, run_pipeline, sweep_lambda
from .voting import merge_tally, pseudo_count_kappa, tally_votes

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--lambda", dest="lam", type=float, help="confidence-weight rate")
    p.add_argument("--threshold", type=float, help="score threshold t")
    p.add_argument("--learner", choices=("oracle", "noisy-oracle", "notears-lite"))
    p.add_argument("--mb", choices=("oracle", "grow-shrink"), help="Markov blanket estimator")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", help="output directory")
    p.add_argument("--voting", choices=("weighted", "naive"))
    p.add_argument("-v", "--verbose", action="store_true")


def _config(args) -> PipelineConfig:
    try:
        return _build_config(args)
    except (ValueError, TypeError, OSError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _build_config(args) -> PipelineConfig:
    base = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    cfg = base.replace(master_seed=args.seed, lam=args.lam, threshold=args.threshold,
                       learner=args.learner, mb_estimator=args.mb, jobs=args.jobs,
                       out=args.out, voting=args.voting)
    if cfg.out is None:
        cfg = cfg.replace(out=".")
    for attr, field in (("data", "data_path"), ("truth", "truth_path")):
        if getattr(args, attr, None):
            cfg = cfg.replace(**{field: getattr(args, attr)})
    return cfg


def _out(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_truth(cfg: PipelineConfig, required: bool):
    path = Path(cfg.truth_path) if cfg.truth_path else Path(cfg.out) / "truth.tsv"
    if not path.exists():
        if required:
            raise UsageError(f"ground truth not found at {path}")
        return None
    g = io.read_edges_tsv(path)
    return getattr(g, "digraph", g)


def _load_data(cfg: PipelineConfig, required: bool):
    path = Path(cfg.data_path) if cfg.data_path else Path(cfg.out) / "data.csv"
    if not path.exists():
        if required:
            raise UsageError(f"data not found at {path}")
        return None
    return io.read_data_csv(path)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


# ---- stage commands ------------------------------------------------------------

def cmd_generate(args) -> None:
    cfg = _config(args)
    out = _out(cfg)
    truth = generate_truth(cfg)
    scm, X = generate_data(cfg, truth)
    io.write_edges_tsv(out / "truth.tsv", truth)
    io.write_scm(out / "scm.tsv", scm, cfg.master_seed)
    io.write_data_csv(out / "data.csv", X)
    _print_json({"n": truth.n, "edges": truth.num_edges, "samples": int(X.shape[0])})


def cmd_mb(args) -> None:
    cfg = _config(args)
    out = _out(cfg)
    oracle = cfg.mb_estimator == "oracle"
    truth = _load_truth(cfg, required=oracle)
    X = None if oracle else _load_data(cfg, required=True)
    n = truth.n if X is None else X.shape[1]
    est = make_mb_estimator(cfg.mb_estimator, X, n, truth, cfg.ci_alpha)
    blankets = all_markov_blankets(est, n, cfg.jobs, cfg.symmetrize_mb)
    io.write_blankets_json(out / "mb.json", blankets)
    _print_json({"n": n, "mean_size": float(np.mean([len(b.members) for b in blankets]))})


def cmd_learn(args) -> None:
    cfg = _config(args)
    out = _out(cfg)
    blankets = io.read_blankets_json(out / "mb.json")
    needs_truth = cfg.learner != "notears-lite"
    truth = _load_truth(cfg, required=needs_truth)
    X = _load_data(cfg, required=not needs_truth)
    learner = make_learner(cfg.learner, truth, cfg.learner_params())
    local_graphs = learn_all_subgraphs(learner, blankets, X, cfg.master_seed, cfg.jobs)
    n = len(blankets)
    tally = tally_votes(local_graphs, n)
    io.write_locals_json(out / "locals.json", local_graphs)
    io.write_tally_csv(out / "votes.csv", tally, cfg.upstream_hash())
    failed = {lg.center: lg.error for lg in local_graphs if lg.error}
    _print_json({"n": n, "failed_subgraphs": failed, **tally.summary()})


def cmd_merge(args) -> None:
    cfg = _config(args)
    out = _out(cfg)
    tally, _ = io.read_tally_csv(Path(args.votes) if args.votes else out / "votes.csv")
    result = merge_tally(tally, cfg.voting_params())
    io.write_edges_tsv(out / "merged.tsv", result.merged)
    io.write_edges_tsv(out / "final.tsv", result.dag)
    io.write_fas_json(out / "fas.json", result.fas)
    _print_json(result.diagnostics)


def cmd_pipeline(args) -> None:
    cfg = _config(args)
    report = run_pipeline(cfg)
    _print_json({k: report.to_dict()[k] for k in ("config_hash", "metrics", "stage_times", "failed_subgraphs")})


def _grid(text: str):
    if ":" in text:
        lo, hi, k = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(k)))
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> None:
    cfg = _config(args)
    try:
        grid = _grid(args.grid)
    except ValueError as exc:
        raise UsageError(f"bad --grid {args.grid!r}: {exc}") from None
    if not grid or any(g <= 0 for g in grid):
        raise UsageError("--grid must list positive lambda values")
    rows = sweep_lambda(cfg, grid)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def cmd_eval(args) -> None:
    est = io.read_edges_tsv(args.est)
    truth = io.read_edges_tsv(args.truth)
    _print_json(evaluate(getattr(est, "digraph", est), getattr(truth, "digraph", truth)))


# ---- theory ------------------------------------------------------------------------

def _float_list(s):
    return [float(x) for x in s.split(",") if x.strip()]


def _run_model(fn):
    def call(m, p, t, lam, epsilon, q):
        return fn(theory.VoteModel(int(m), p, t, lam, epsilon, q))
    return call


def _monte_carlo(m, p, t, lam, epsilon, trials, seed):
    model = theory.VoteModel(int(m), p, t, lam, epsilon)
    return theory.monte_carlo_accept_rate(model, int(trials), int(seed))


# name -> (callable, [(param, default)]); list-valued params are marked with a list default
CALCULATORS = {
    "effective-threshold": (theory.effective_threshold, [("t", 0.7), ("lam", 0.5), ("m", 10.0)]),
    "sufficient-condition": (_run_model(theory.check_sufficient_condition),
                             [("m", 50), ("p", 0.9), ("t", 0.7), ("lam", 0.5), ("epsilon", 0.05), ("q", 0.0)]),
    "min-votes": (theory.min_votes_bound, [("p", 0.9), ("t", 0.7), ("lam", 0.5), ("epsilon", 0.05)]),
    "lambda-range": (theory.lambda_range, [("m", 10.0), ("t", 0.7), ("epsilon", 0.05)]),
    "structure-bound": (theory.structure_error_bound,
                        [("true_ms", []), ("false_ms", []), ("p", 0.9), ("q", 0.02),
                         ("t", 0.7), ("lam", 0.5)]),
    "worst-case": (theory.worst_case_bound, [("n", 20), ("h", 3.0), ("m_min", 10.0), ("p", 0.9),
                                             ("q", 0.02), ("t", 0.7), ("lam", 0.5)]),
    "consistency-constant": (theory.consistency_constant, [("delta_p", 0.2), ("delta_q", 0.2)]),
    "consistency-constant-proof": (theory.consistency_constant_proof, [("delta_p", 0.2), ("delta_q", 0.2)]),
    "pseudo-count": (pseudo_count_kappa, [("m", 10.0), ("lam", 0.5)]),
    "monte-carlo": (_monte_carlo, [("m", 50), ("p", 0.9), ("t", 0.7), ("lam", 0.5), ("epsilon", 0.05),
                           ("trials", 100000), ("seed", 0)]),
    "er-sf-bound": (theory.er_sf_bound, [("family", "ER"), ("n", 20), ("h", 3.0), ("p", 0.9), ("q", 0.02),
                                         ("t", 0.7), ("lam", 0.5), ("alpha_tail", 2.5), ("c_alpha", 1.0)]),
}


def _jsonable(v):
    if isinstance(v, theory.Verdict):
        return v.value
    if isinstance(v, theory.BoundTerms):
        return v.to_dict()
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _typed(default, raw: str):
    if isinstance(default, str):
        return raw
    if isinstance(default, int) and not isinstance(default, bool):
        return int(raw)
    return float(raw)


def cmd_theory(args) -> None:
    fn, params_spec = CALCULATORS[args.calculator]
    given = dict(args.param or [])
    unknown = set(given) - {k for k, _ in params_spec}
    if unknown:
        raise UsageError(f"unknown parameter(s) for {args.calculator}: {sorted(unknown)}")
    axes = {}
    try:
        for k, default in params_spec:
            if isinstance(default, list):
                axes[k] = [_float_list(given[k])] if k in given else [default]
            elif k in given:
                axes[k] = [_typed(default, x) for x in given[k].split(",")]
            else:
                axes[k] = [default]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = list(axes)
    combos = list(itertools.product(*axes.values()))
    if len(combos) == 1:
        kwargs = dict(zip(names, combos[0]))
        try:
            value = fn(**kwargs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _print_json({"calculator": args.calculator, "params": kwargs, "value": _jsonable(value)})
        return
    grid_cols = [k for k in names if len(axes[k]) > 1]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(grid_cols + ["value"])
    for combo in combos:
        kwargs = dict(zip(names, combo))
        try:
            value = _jsonable(fn(**kwargs))
        except ValueError as exc:
            value = f"error: {exc}"
        if not isinstance(value, (str, int, float)):
            value = json.dumps(value)
        w.writerow([kwargs[k] for k in grid_cols] + [value])


def _param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip().replace("-", "_"), v.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbvote", description="Markov-blanket divide-and-vote DAG learning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="sample a ground-truth DAG and data")
    _common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mb", help="estimate Markov blankets")
    _common(p)
    p.add_argument("--data")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_mb)

    p = sub.add_parser("learn", help="learn local graphs and tally votes")
    _common(p)
    p.add_argument("--data")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("merge", help="score, break cycles and threshold a vote tally")
    _common(p)
    p.add_argument("--votes", help="tally CSV (default: <out>/votes.csv)")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _common(p)
    p.add_argument("--data")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("sweep-lambda", help="metrics over a lambda grid from one learning pass")
    _common(p)
    p.add_argument("--grid", required=True, help="comma list or lo:hi:count")
    p.add_argument("--data")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theory", help="evaluate a bound calculator; comma lists give a CSV grid")
    p.add_argument("calculator", choices=sorted(CALCULATORS))
    p.add_argument("--param", "-p", action="append", type=_param, metavar="NAME=VALUE")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("eval", help="compare an edge list against the ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, io.ParseError, FileNotFoundError) as exc:
        print(f"mbvote: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"mbvote: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:  # noqa: BLE001
        print(f"mbvote: stage '{args.command}' failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
