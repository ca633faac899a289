import csv
import io as stdio
import json

import pytest

from mbvote import io
from mbvote.cli import CALCULATORS, main
from mbvote.graph import Digraph

ORACLE = ["--mb", "oracle", "--learner", "oracle", "--threshold", "0.5"]


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestStages:
    def test_chained_stages(self, tmp_path, capsys):
        out = str(tmp_path)
        assert _run(capsys, "generate", "--out", out, "--seed", "2")[0] == 0
        assert {"truth.tsv", "data.csv", "scm.tsv"} <= {p.name for p in tmp_path.iterdir()}
        assert _run(capsys, "mb", "--out", out, "--mb", "oracle")[0] == 0
        code, text, _ = _run(capsys, "learn", "--out", out, "--learner", "oracle")
        assert code == 0 and json.loads(text)["failed_subgraphs"] == {}
        assert _run(capsys, "merge", "--out", out, "--lambda", "5", "--threshold", "0.5")[0] == 0
        code, text, _ = _run(capsys, "eval", "--est", f"{out}/final.tsv", "--truth", f"{out}/truth.tsv")
        assert code == 0 and json.loads(text)["shd"] == 0

    def test_pipeline_command(self, tmp_path, capsys):
        code, text, _ = _run(capsys, "pipeline", "--out", str(tmp_path), *ORACLE, "--lambda", "5")
        assert code == 0
        assert json.loads(text)["metrics"]["shd"] == 0
        assert (tmp_path / "report.json").exists()

    def test_config_file_with_override(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 8, "mb_estimator": "oracle", "learner": "oracle", "lambda": 5.0}))
        code, _, _ = _run(capsys, "pipeline", "--config", str(cfg), "--out", str(tmp_path / "r"), "--seed", "4")
        report = json.loads((tmp_path / "r" / "report.json").read_text())
        assert code == 0 and report["config"]["n"] == 8 and report["config"]["master_seed"] == 4

    def test_sweep_lambda(self, tmp_path, capsys):
        code, text, _ = _run(capsys, "sweep-lambda", "--out", str(tmp_path), *ORACLE, "--grid", "0.5:2:4")
        rows = list(csv.DictReader(stdio.StringIO(text)))
        assert code == 0 and len(rows) == 4
        assert (tmp_path / "sweep.csv").exists()

    def test_jobs_identical(self, tmp_path, capsys):
        args = ["pipeline", "--mb", "oracle", "--learner", "noisy-oracle", "--seed", "5"]
        _run(capsys, *args, "--out", str(tmp_path / "a"))
        _run(capsys, *args, "--out", str(tmp_path / "b"), "--jobs", "2")
        assert (tmp_path / "a" / "final.tsv").read_bytes() == (tmp_path / "b" / "final.tsv").read_bytes()


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["pipeline", "--bogus"])
        assert info.value.code == 1

    def test_missing_command(self, capsys):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 1

    def test_invalid_value(self, tmp_path, capsys):
        code, _, err = _run(capsys, "pipeline", "--out", str(tmp_path), "--lambda", "-1")
        assert code == 1 and "invalid configuration" in err

    def test_missing_input(self, tmp_path, capsys):
        assert _run(capsys, "learn", "--out", str(tmp_path))[0] == 1

    def test_parse_error(self, tmp_path, capsys):
        (tmp_path / "votes.csv").write_text("1,0\n0")
        assert _run(capsys, "merge", "--out", str(tmp_path))[0] == 1

    def test_stage_failure(self, tmp_path, capsys):
        io.write_edges_tsv(tmp_path / "cyc.tsv", Digraph(2, [(0, 1), (1, 0)]))
        code, _, err = _run(capsys, "pipeline", "--out", str(tmp_path), *ORACLE, "--truth", str(tmp_path / "cyc.tsv"))
        assert code == 2 and "stage 'mb'" in err

    def test_bad_grid(self, tmp_path, capsys):
        assert _run(capsys, "sweep-lambda", "--out", str(tmp_path), "--grid", "0,1")[0] == 1


class TestTheory:
    def test_json(self, capsys):
        code, text, _ = _run(capsys, "theory", "lambda-range", "-p", "m=2", "-p", "t=0.7", "-p", "epsilon=0.05")
        value = json.loads(text)["value"]
        assert code == 0 and value == pytest.approx([0.601986, 1.497866], abs=1e-6)

    def test_sentinel(self, capsys):
        _, text, _ = _run(capsys, "theory", "min-votes", "-p", "p=0.9", "-p", "t=0.7", "-p", "lam=1")
        assert json.loads(text)["value"] == "infeasible"

    def test_grid_csv(self, capsys):
        code, text, _ = _run(capsys, "theory", "effective-threshold", "-p", "m=2,5", "-p", "lam=0.5,1")
        rows = list(csv.DictReader(stdio.StringIO(text)))
        assert code == 0 and len(rows) == 4 and set(rows[0]) == {"lam", "m", "value"}

    def test_list_params(self, capsys):
        _, text, _ = _run(capsys, "theory", "structure-bound", "-p", "true_ms=150", "-p", "t=0.7",
                          "-p", "p=0.9", "-p", "q=0")
        assert json.loads(text)["value"] == pytest.approx(6.14e-6, rel=1e-2)

    def test_bound_terms(self, capsys):
        _, text, _ = _run(capsys, "theory", "er-sf-bound", "-p", "family=SF", "-p", "n=100")
        assert set(json.loads(text)["value"]) == {"fn_term", "fp_term", "residual", "total"}

    @pytest.mark.parametrize("name", sorted(CALCULATORS))
    def test_every_calculator_runs_with_defaults(self, name, capsys):
        args = ["theory", name] + (["-p", "trials=1000"] if name == "monte-carlo" else [])
        assert _run(capsys, *args)[0] == 0

    def test_unknown_param(self, capsys):
        assert _run(capsys, "theory", "min-votes", "-p", "zeta=1")[0] == 1

    def test_out_of_domain(self, capsys):
        assert _run(capsys, "theory", "consistency-constant", "-p", "delta_p=1")[0] == 1
