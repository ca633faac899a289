import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbvote import io
from mbvote.ci import MarkovBlanket
from mbvote.fas import break_cycles
from mbvote.graph import Digraph, WeightedDigraph
from mbvote.learners import LocalGraph
from mbvote.synth import gen_er_dag, sample_weights
from mbvote.voting import VoteTally


class TestEdges:
    def test_round_trip(self, tmp_path):
        g = gen_er_dag(30, 3, 0)
        io.write_edges_tsv(tmp_path / "g.tsv", g)
        assert io.read_edges_tsv(tmp_path / "g.tsv") == g

    def test_isolated_nodes_kept(self, tmp_path):
        io.write_edges_tsv(tmp_path / "g.tsv", Digraph(5, [(0, 1)]))
        assert io.read_edges_tsv(tmp_path / "g.tsv").n == 5

    def test_weighted_round_trip(self, tmp_path):
        wg = WeightedDigraph(3, {(0, 1): 0.1 + 0.2, (2, 1): 1 / 3})
        io.write_edges_tsv(tmp_path / "w.tsv", wg)
        back = io.read_edges_tsv(tmp_path / "w.tsv")
        assert back.weights == wg.weights

    def test_header_row_skipped(self, tmp_path):
        (tmp_path / "g.tsv").write_text("src\tdst\n0\t1\n1\t2\n")
        assert io.read_edges_tsv(tmp_path / "g.tsv").edges == {(0, 1), (1, 2)}

    @pytest.mark.parametrize("text,line", [("0\t1\n1\n", 2), ("0\t1\nx\t2\n", 2)])
    def test_malformed(self, tmp_path, text, line):
        (tmp_path / "g.tsv").write_text(text)
        with pytest.raises(io.ParseError) as info:
            io.read_edges_tsv(tmp_path / "g.tsv")
        assert info.value.line == line

    def test_truncated(self, tmp_path):
        io.write_edges_tsv(tmp_path / "g.tsv", gen_er_dag(10, 3, 1))
        text = (tmp_path / "g.tsv").read_text()
        (tmp_path / "g.tsv").write_text(text[: len(text) // 2])
        with pytest.raises(io.ParseError):
            io.read_edges_tsv(tmp_path / "g.tsv")

    def test_missing_edges_detected(self, tmp_path):
        io.write_edges_tsv(tmp_path / "g.tsv", Digraph(3, [(0, 1), (1, 2)]))
        lines = (tmp_path / "g.tsv").read_text().splitlines()
        (tmp_path / "g.tsv").write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(io.ParseError):
            io.read_edges_tsv(tmp_path / "g.tsv")

    def test_adjacency_round_trip(self, tmp_path):
        g = gen_er_dag(8, 2, 3)
        io.write_adjacency_csv(tmp_path / "a.csv", g)
        assert io.read_adjacency_csv(tmp_path / "a.csv") == g


class TestMatrices:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_data_bit_exact(self, seed):
        import tempfile
        from pathlib import Path
        X = np.random.default_rng(seed).normal(size=(7, 4)) * 10.0 ** np.arange(-3, 1)
        with tempfile.TemporaryDirectory() as d:
            io.write_data_csv(Path(d) / "x.csv", X)
            assert np.array_equal(io.read_data_csv(Path(d) / "x.csv"), X)

    def test_data_missing_header(self, tmp_path):
        (tmp_path / "x.csv").write_text("")
        with pytest.raises(io.ParseError):
            io.read_data_csv(tmp_path / "x.csv")

    def test_data_ragged(self, tmp_path):
        (tmp_path / "x.csv").write_text("x0,x1\n1,2\n3\n")
        with pytest.raises(io.ParseError) as info:
            io.read_data_csv(tmp_path / "x.csv")
        assert info.value.line == 3

    def test_data_non_finite(self, tmp_path):
        (tmp_path / "x.csv").write_text("x0\nnan\n")
        with pytest.raises(io.ParseError):
            io.read_data_csv(tmp_path / "x.csv")

    def test_tally_round_trip(self, tmp_path):
        A = np.random.default_rng(0).integers(0, 9, size=(6, 6))
        np.fill_diagonal(A, 0)
        io.write_tally_csv(tmp_path / "v.csv", VoteTally(A), "abc123")
        tally, h = io.read_tally_csv(tmp_path / "v.csv")
        assert np.array_equal(tally.edge_count, A) and h == "abc123"

    def test_tally_truncated(self, tmp_path):
        A = np.ones((4, 4), int) - np.eye(4, dtype=int)
        io.write_tally_csv(tmp_path / "v.csv", VoteTally(A))
        lines = (tmp_path / "v.csv").read_text().splitlines()
        (tmp_path / "v.csv").write_text("\n".join(lines[:3]) + "\n")
        with pytest.raises(io.ParseError):
            io.read_tally_csv(tmp_path / "v.csv")

    def test_tally_invalid_values(self, tmp_path):
        (tmp_path / "v.csv").write_text("# n=2 rows=2\n1,0\n0,0\n")
        with pytest.raises(io.ParseError):
            io.read_tally_csv(tmp_path / "v.csv")


class TestJson:
    def test_blankets(self, tmp_path):
        bl = [MarkovBlanket(0, {1, 2}), MarkovBlanket(1, {0}), MarkovBlanket(2, ())]
        io.write_blankets_json(tmp_path / "mb.json", bl)
        assert io.read_blankets_json(tmp_path / "mb.json") == bl

    def test_locals(self, tmp_path):
        lgs = [LocalGraph(4, (1, 4, 6), Digraph(3, [(0, 2), (1, 0)])),
               LocalGraph(6, (6,), Digraph(1), "diverged")]
        io.write_locals_json(tmp_path / "l.json", lgs)
        assert io.read_locals_json(tmp_path / "l.json") == lgs

    def test_bad_json(self, tmp_path):
        (tmp_path / "mb.json").write_text('{"0": [1,')
        with pytest.raises(io.ParseError):
            io.read_blankets_json(tmp_path / "mb.json")

    def test_fas(self, tmp_path):
        import json
        io.write_fas_json(tmp_path / "f.json", break_cycles(WeightedDigraph(2, {(0, 1): 0.8, (1, 0): 0.3})))
        assert json.loads((tmp_path / "f.json").read_text())["removed"] == [[1, 0, 0.3]]

    def test_scm(self, tmp_path):
        scm = sample_weights(gen_er_dag(10, 3, 2), seed=2, noise_scale=0.5)
        io.write_scm(tmp_path / "scm.tsv", scm, seed=2)
        back = io.read_scm(tmp_path / "scm.tsv")
        assert back.weights == scm.weights and back.noise_scale == 0.5 and back.graph == scm.graph
