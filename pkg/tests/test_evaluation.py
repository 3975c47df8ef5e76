import math

import numpy as np
import pytest

from ncaa.errors import MetricError, ShapeError
from ncaa.evaluation import EvalReport, evaluate, hungarian, mrsa
from oracles import brute_force_assignment


class TestMrsa:
    def test_identical_is_zero(self):
        x = np.array([0.3, 1.2, -0.7, 2.0])
        # arccos amplifies rounding near cos=1 to ~sqrt(eps)
        assert mrsa(x, x) == pytest.approx(0.0, abs=1e-6)

    def test_antiparallel_is_hundred(self):
        assert mrsa(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0])) == (
            pytest.approx(100.0, abs=1e-6)
        )

    def test_orthogonal_is_fifty(self):
        x = np.array([1.0, 0.0, -1.0, 0.0])
        y = np.array([0.0, 1.0, 0.0, -1.0])
        assert mrsa(x, y) == pytest.approx(50.0, abs=1e-10)

    def test_scale_and_shift_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            x = rng.normal(size=6)
            y = rng.normal(size=6)
            base = mrsa(x, y)
            a = float(rng.uniform(0.1, 10.0))
            c = float(rng.normal())
            assert mrsa(a * x + c, y) == pytest.approx(base, abs=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.normal(size=5)
            y = rng.normal(size=5)
            assert mrsa(x, y) == pytest.approx(mrsa(y, x), abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            v = mrsa(rng.normal(size=4), rng.normal(size=4))
            assert 0.0 <= v <= 100.0

    def test_constant_vector_rejected(self):
        with pytest.raises(MetricError):
            mrsa(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0]))


class TestHungarian:
    def test_identity_favoring(self):
        cost = np.ones((4, 4)) - np.eye(4)
        assert np.array_equal(hungarian(cost), np.arange(4))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            r = int(rng.integers(2, 6))
            cost = rng.uniform(size=(r, r))
            perm = hungarian(cost)
            _, best_val = brute_force_assignment(cost)
            got = float(cost[np.arange(r), perm].sum())
            assert got == pytest.approx(best_val, abs=1e-12)

    def test_row_offset_invariance(self):
        rng = np.random.default_rng(5)
        cost = rng.uniform(size=(5, 5))
        shifted = cost + rng.uniform(size=(5, 1))  # constant per row
        assert np.array_equal(hungarian(cost), hungarian(shifted))

    def test_total_cost_beats_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            cost = rng.uniform(size=(6, 6))
            perm = hungarian(cost)
            assert cost[np.arange(6), perm].sum() <= np.trace(cost) + 1e-12

    def test_nonsquare_rejected(self):
        with pytest.raises(ShapeError):
            hungarian(np.ones((2, 3)))


class TestEvaluate:
    def test_exact_match(self):
        rng = np.random.default_rng(7)
        W = rng.uniform(size=(6, 4))
        rep = evaluate(W, W)
        assert rep.mrsa_average == pytest.approx(0.0, abs=1e-6)
        assert sorted(rep.assignment) == [0, 1, 2, 3]

    def test_permuted_columns_score_zero(self):
        rng = np.random.default_rng(8)
        W = rng.uniform(size=(6, 4))
        perm = [2, 0, 3, 1]
        rep = evaluate(W[:, perm], W)
        assert rep.mrsa_average == pytest.approx(0.0, abs=1e-6)
        # assignment undoes the permutation
        assert [perm[j] for j in rep.assignment] == [0, 1, 2, 3]

    def test_single_reversed_column(self):
        rng = np.random.default_rng(9)
        W = rng.uniform(size=(5, 3))
        W_est = W.copy()
        W_est[:, 1] = W[::-1, 1]
        rep = evaluate(W_est, W)
        expected = mrsa(W[:, 1], W[::-1, 1]) / 3.0
        assert rep.mrsa_average == pytest.approx(expected, rel=1e-9)

    def test_invariant_to_estimate_permutation(self):
        rng = np.random.default_rng(10)
        W = rng.uniform(size=(6, 4))
        W_est = W + 0.01 * rng.normal(size=W.shape)
        a = evaluate(W_est, W)
        b = evaluate(W_est[:, [3, 1, 0, 2]], W)
        assert a.mrsa_average == pytest.approx(b.mrsa_average, abs=1e-12)
        assert sorted(a.mrsa_per_pair) == pytest.approx(sorted(b.mrsa_per_pair))

    def test_rel_error(self):
        X = np.array([[3.0, 0.0], [0.0, 4.0]])
        X_hat = np.zeros((2, 2))
        rng = np.random.default_rng(11)
        W = rng.uniform(size=(2, 2))
        rep = evaluate(W, W, X, X_hat)
        assert rep.rel_error == pytest.approx(1.0)

    def test_rel_error_nan_without_reconstruction(self):
        rng = np.random.default_rng(12)
        W = rng.uniform(size=(3, 2))
        rep = evaluate(W, W)
        assert math.isnan(rep.rel_error)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            evaluate(np.ones((3, 2)), np.ones((3, 3)))


class TestReportSerialization:
    def test_json_and_csv(self):
        rep = EvalReport(
            assignment=[1, 0],
            mrsa_per_pair=[0.5, 1.5],
            mrsa_average=1.0,
            rel_error=0.25,
            method_tag="ncaa",
            wall_time=2.5,
        )
        doc = rep.to_json_dict()
        assert doc["mrsa_average"] == 1.0
        assert doc["assignment"] == [1, 0]
        header = EvalReport.csv_header()
        row = rep.to_csv_row()
        assert len(header.split(",")) == len(row.split(","))
        assert row.startswith("ncaa,")

    def test_nan_rel_error_serializes_empty(self):
        rep = EvalReport([0], [0.0], 0.0, math.nan)
        assert rep.to_json_dict()["rel_error"] is None
        assert ",," in rep.to_csv_row()
