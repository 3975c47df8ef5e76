import numpy as np
import pytest

from ncaa.errors import ConfigError, DataError
from ncaa.evaluation import evaluate
from ncaa.selection import hc_select, snpa_select
from ncaa.synthdata import SyntheticSpec, generate


class TestSnpa:
    def test_simplex_vertices_recovered(self):
        # columns are 4 well-separated vertices plus strict interior mixtures
        rng = np.random.default_rng(1)
        m, r, extra = 6, 4, 40
        V = rng.uniform(0.5, 1.5, size=(m, r)) + 2.0 * np.eye(m)[:, :r]
        mixes = rng.dirichlet(np.ones(r) * 3.0, size=extra).T  # bounded away from vertices
        X = np.hstack([V, V @ mixes])
        sel = snpa_select(np.asfortranarray(X), r)
        assert sorted(sel.indices) == [0, 1, 2, 3]
        assert not sel.exhausted

    def test_separable_data_recovers_endmembers(self):
        spec = SyntheticSpec(m=8, n=100, r=5, purity=1.0, noise=0.0, seed=3)
        inst = generate(spec, 0)
        sel = snpa_select(inst.X, 5)
        rep = evaluate(sel.Y, inst.W_true)
        assert rep.mrsa_average < 0.01

    def test_d_one_picks_max_norm_column(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(size=(5, 20))
        X[:, 7] *= 10.0
        sel = snpa_select(np.asfortranarray(X), 1)
        assert sel.indices == [7]

    def test_picks_distinct_and_dominant(self):
        rng = np.random.default_rng(5)
        X = np.asfortranarray(rng.uniform(size=(6, 30)))
        sel = snpa_select(X, 8, keep_step_norms=True)
        assert len(set(sel.indices)) == 8
        for k, norms in enumerate(sel.step_norms):
            pick = sel.indices[k]
            others = np.delete(norms, sel.indices[:k])
            assert norms[pick] >= others.max() - 1e-12

    def test_selected_columns_are_data_columns(self):
        rng = np.random.default_rng(6)
        X = np.asfortranarray(rng.uniform(size=(4, 15)))
        sel = snpa_select(X, 5)
        for k, j in enumerate(sel.indices):
            assert np.array_equal(sel.Y[:, k], X[:, j])

    def test_exhaustion_sets_flag(self):
        # rank-1 data: one pick reproduces everything
        u = np.linspace(1.0, 2.0, 5)
        X = np.asfortranarray(np.outer(u, [1.0, 0.5, 0.25, 2.0]))
        sel = snpa_select(X, 3)
        assert sel.exhausted
        assert len(sel.indices) < 3

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        X = np.asfortranarray(rng.uniform(size=(6, 40)))
        a = snpa_select(X, 6)
        b = snpa_select(X, 6)
        assert a.indices == b.indices
        assert np.array_equal(a.Y, b.Y)

    def test_rejects_negative_data(self):
        with pytest.raises(DataError):
            snpa_select(np.array([[1.0, -0.5]]), 1)

    def test_d_too_large(self):
        with pytest.raises(ConfigError):
            snpa_select(np.ones((2, 3)), 4)


def make_blobs(rng, d, per=30, m=6, spread=0.05):
    centers = rng.uniform(1.0, 2.0, size=(m, d)) + 3.0 * np.eye(m)[:, :d]
    cols = []
    for j in range(d):
        cols.append(centers[:, [j]] + spread * rng.standard_normal((m, per)))
    X = np.hstack(cols)
    return np.asfortranarray(np.maximum(X, 0.0)), centers


class TestHc:
    def test_one_representative_per_blob(self):
        rng = np.random.default_rng(10)
        X, centers = make_blobs(rng, d=4)
        sel = hc_select(X, 4)
        assert sel.Y.shape == (6, 4)
        nearest = [int(np.argmin(np.sum((centers - sel.Y[:, [k]]) ** 2, axis=0)))
                   for k in range(4)]
        assert sorted(nearest) == [0, 1, 2, 3]

    def test_d_one_nearest_global_centroid(self):
        rng = np.random.default_rng(11)
        X = np.asfortranarray(rng.uniform(size=(5, 25)))
        sel = hc_select(X, 1)
        centroid = X.mean(axis=1)
        dists = np.sum((X - centroid[:, None]) ** 2, axis=0)
        assert np.array_equal(sel.Y[:, 0], X[:, int(np.argmin(dists))])

    def test_duplicated_outlier_chosen_at_most_once(self):
        rng = np.random.default_rng(12)
        X, _ = make_blobs(rng, d=3, per=20)
        outlier = np.full((6, 1), 30.0)
        X = np.asfortranarray(np.hstack([X, outlier, outlier]))
        sel = hc_select(X, 4)
        hits = sum(
            1 for k in range(4) if np.allclose(sel.Y[:, k], outlier[:, 0])
        )
        assert hits <= 1

    def test_output_columns_are_data_columns(self):
        rng = np.random.default_rng(13)
        X = np.asfortranarray(rng.uniform(size=(5, 40)))
        sel = hc_select(X, 6)
        for k in range(6):
            match = np.any(np.all(np.isclose(X, sel.Y[:, [k]], atol=0), axis=0))
            assert match

    def test_deterministic(self):
        rng = np.random.default_rng(14)
        X = np.asfortranarray(rng.uniform(size=(6, 50)))
        a = hc_select(X, 5)
        b = hc_select(X, 5)
        assert np.array_equal(a.Y, b.Y)

    def test_identical_columns_degenerate(self):
        X = np.asfortranarray(np.tile([[1.0], [2.0]], (1, 8)))
        sel = hc_select(X, 3)
        assert sel.Y.shape == (2, 3)
        for k in range(3):
            assert np.array_equal(sel.Y[:, k], X[:, 0])

    def test_d_too_large(self):
        with pytest.raises(ConfigError):
            hc_select(np.ones((2, 3)), 4)
