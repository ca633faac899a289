import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mbvote import MBVoteDiscovery
from mbvote.synth import gen_er_dag, sample_linear_sem, sample_weights


def _oracle(g, **kw):
    kw.setdefault("learner", "oracle")
    return MBVoteDiscovery(mb_estimator="oracle", oracle_graph=g, **kw)


class TestMBVoteDiscovery:
    def test_params_and_clone(self):
        est = MBVoteDiscovery(lam=1.5, threshold=0.6)
        params = clone(est).get_params()
        assert params["lam"] == 1.5 and params["threshold"] == 0.6
        assert est.set_params(voting="naive").voting == "naive"

    def test_oracle_exact_recovery(self):
        g = gen_er_dag(25, 3, 0)
        coarse = _oracle(g, threshold=0.5).fit()
        m = coarse.tally_.min_occurrence()
        est = _oracle(g, lam=-np.log(0.5) / m * 1.5, threshold=0.5).fit()
        assert est.graph_ == g
        assert est.adjacency_matrix_.sum() == g.num_edges
        assert est.failed_subgraphs_ == {}

    def test_remerge_does_not_refit(self):
        g = gen_er_dag(15, 3, 1)
        est = _oracle(g, learner="noisy-oracle", learner_params={"p": 0.8, "q": 0.05}).fit()
        locals_before = est.local_graphs_
        naive = est.remerge(voting="naive", threshold=0.5)
        assert est.local_graphs_ is locals_before
        assert naive.dag == est.remerge(lam=50.0, threshold=0.5).dag

    def test_fit_with_data(self):
        g = gen_er_dag(8, 2, 2)
        X = sample_linear_sem(sample_weights(g, seed=2), 500, 2)
        est = MBVoteDiscovery(learner="oracle", oracle_graph=g, threshold=0.5).fit(X)
        assert est.n_features_in_ == 8 and len(est.blankets_) == 8

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            MBVoteDiscovery().graph_
        with pytest.raises(NotFittedError):
            MBVoteDiscovery().remerge()

    @pytest.mark.parametrize("kw", [dict(learner="oracle"), dict(mb_estimator="oracle"),
                                    dict(learner="pc"), dict(mb_estimator="iamb")])
    def test_bad_configuration(self, kw):
        X = np.random.default_rng(0).normal(size=(50, 3))
        with pytest.raises(ValueError):
            MBVoteDiscovery(**kw).fit(X)

    def test_data_learner_needs_x(self):
        with pytest.raises(ValueError):
            MBVoteDiscovery(mb_estimator="oracle", oracle_graph=gen_er_dag(4, 1, 0)).fit()

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            _oracle(gen_er_dag(4, 1, 0)).fit(np.random.default_rng(0).normal(size=(20, 5)))
