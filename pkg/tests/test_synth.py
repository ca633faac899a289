import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbvote.graph import Digraph, is_acyclic
from mbvote.synth import (ZeroVarianceError, derive_seed, gen_er_dag, gen_sf_dag, sample_linear_sem,
                          sample_quadratic_sem, sample_weights, standardize)


class TestGenerators:
    def test_er_forced_edge(self):
        for seed in range(10):
            assert gen_er_dag(2, 1, seed).num_edges == 1

    def test_er_mean_edge_count(self):
        counts = [gen_er_dag(100, 3, s).num_edges for s in range(200)]
        assert abs(np.mean(counts) - 150) <= 15

    @pytest.mark.parametrize("n,h", [(1, 1), (5, 0), (5, 5)])
    def test_er_invalid(self, n, h):
        with pytest.raises(ValueError):
            gen_er_dag(n, h, 0)

    def test_sf_base_case(self):
        g = gen_sf_dag(3, 2, 0)  # ceil(2/2) = 1 attachment per node
        assert g.num_edges == 2 and is_acyclic(g)

    def test_sf_heavier_tail_than_er(self):
        def max_degree(g):
            deg = np.zeros(g.n, int)
            for u, v in g.edges:
                deg[u] += 1
                deg[v] += 1
            return deg.max()

        sf = [max_degree(gen_sf_dag(100, 3, s)) for s in range(50)]
        er = [max_degree(gen_er_dag(100, 3, s)) for s in range(50)]
        assert max(sf) > np.median(er)

    def test_sf_invalid(self):
        with pytest.raises(ValueError):
            gen_sf_dag(3, 6, 0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 40), st.floats(0.5, 5), st.integers(0, 2**32 - 1), st.booleans())
    def test_always_acyclic(self, n, h, seed, sf):
        h = min(h, n - 1)
        if sf and np.ceil(h / 2) >= n:
            return
        g = (gen_sf_dag if sf else gen_er_dag)(n, h, seed)
        assert is_acyclic(g)

    def test_deterministic(self):
        assert gen_er_dag(30, 3, 7) == gen_er_dag(30, 3, 7)
        assert gen_sf_dag(30, 3, 7) == gen_sf_dag(30, 3, 7)

    def test_derive_seed_separates_stages(self):
        assert derive_seed(0, 1) != derive_seed(0, 2)
        assert derive_seed(0, 4, 3) == derive_seed(0, 4, 3)


class TestWeights:
    def test_degenerate_interval(self):
        scm = sample_weights(gen_er_dag(10, 3, 0), 1.0, 1.0, seed=0)
        assert all(abs(w) == 1.0 for w in scm.weights.values())

    def test_default_range(self):
        scm = sample_weights(gen_er_dag(50, 3, 1), seed=1)
        mags = np.abs(list(scm.weights.values()))
        assert ((mags >= 0.5) & (mags <= 2.0)).all()
        signs = np.sign(list(scm.weights.values()))
        assert (signs > 0).any() and (signs < 0).any()

    def test_empty_graph(self):
        assert sample_weights(Digraph(4), seed=0).weights == {}

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            sample_weights(Digraph(2), 2.0, 1.0)


class TestSEM:
    def test_pure_noise(self):
        X = sample_linear_sem(sample_weights(Digraph(3), seed=0), 10_000, 0)
        assert (np.abs(X.mean(axis=0)) < 4 / np.sqrt(10_000)).all()

    def test_chain_variance(self):
        scm = sample_weights(Digraph(2, [(0, 1)]), 2.0, 2.0, seed=0)
        scm = type(scm)(scm.graph, {(0, 1): 2.0}, 1.0)
        X = sample_linear_sem(scm, 100_000, 3)
        assert abs(X[:, 1].var() - 5.0) / 5.0 < 0.1

    def test_deterministic(self):
        scm = sample_weights(gen_er_dag(8, 2, 0), seed=0)
        assert np.array_equal(sample_linear_sem(scm, 50, 9), sample_linear_sem(scm, 50, 9))
        assert np.array_equal(sample_quadratic_sem(scm, 50, 9), sample_quadratic_sem(scm, 50, 9))

    def test_quadratic_no_edges_matches_linear(self):
        scm = sample_weights(Digraph(3), seed=0)
        assert np.array_equal(sample_linear_sem(scm, 100, 1), sample_quadratic_sem(scm, 100, 1))

    def test_quadratic_moment(self):
        scm = sample_weights(Digraph(2, [(0, 1)]), 1.0, 1.0, seed=0)
        scm = type(scm)(scm.graph, {(0, 1): 1.0}, 1.0)
        X = sample_quadratic_sem(scm, 100_000, 4)
        assert abs(X[:, 1].mean() - 1.0) < 0.05

    def test_quadratic_clipped(self):
        g = Digraph(6, [(i, i + 1) for i in range(5)])
        scm = type(sample_weights(g, seed=0))(g, {e: 2.0 for e in g.edges}, 1.0)
        X = sample_quadratic_sem(scm, 200, 0)
        assert np.isfinite(X).all() and np.abs(X).max() <= 1e6

    def test_n_zero_rows(self):
        with pytest.raises(ValueError):
            sample_linear_sem(sample_weights(Digraph(2), seed=0), 0, 0)


class TestStandardize:
    def test_constant_column(self):
        X = np.c_[np.arange(5.0), np.ones(5)]
        with pytest.raises(ZeroVarianceError) as info:
            standardize(X)
        assert info.value.column == 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_moments(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(rng.uniform(-50, 50, 4), rng.uniform(0.1, 20, 4), size=(200, 4))
        Z = standardize(X)
        assert np.abs(Z.mean(axis=0)).max() < 1e-12
        assert np.abs(Z.std(axis=0, ddof=1) - 1).max() < 1e-12
        assert np.abs(standardize(Z) - Z).max() < 1e-12
