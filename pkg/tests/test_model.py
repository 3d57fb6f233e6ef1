import math

import numpy as np
import pytest

from boolflow import (
    BooleanProblem,
    InstanceSpec,
    PenaltyModel,
    SparsePoly,
    exhaustive_min,
    random_poly,
    recover_x,
    suggest_c,
    to_pm1,
)


def var(n, i):
    return SparsePoly.variable(n, i)


class TestTransform:
    def test_single_variable(self):
        prob = to_pm1(var(1, 0))
        assert prob.Pi == SparsePoly.from_terms(1, [((), 0.5), (((0, 1),), 0.5)])

    def test_product_corners(self):
        prob = to_pm1(var(2, 0) * var(2, 1))
        assert prob.Pi.eval([1.0, 1.0]) == pytest.approx(1.0)
        assert prob.Pi.eval([-1.0, -1.0]) == pytest.approx(0.0)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_minima_coincide_over_both_cubes(self, seed):
        n = 6
        P = random_poly(InstanceSpec(n=n, d=4, sparsity=0.8, seed=seed))
        prob = to_pm1(P)
        best_p = min(
            P.eval(np.array(bits, dtype=float))
            for bits in np.ndindex(*(2,) * n)
        )
        assert exhaustive_min(prob.Pi).value == pytest.approx(best_p, rel=1e-12, abs=1e-12)

    def test_round_trip_identity_on_points(self, rng):
        P = random_poly(InstanceSpec(n=5, d=5, sparsity=0.7, seed=4))
        prob = to_pm1(P)
        for _ in range(20):
            y = rng.random(5)
            assert prob.Pi.eval(2 * y - 1) == pytest.approx(P.eval(y), rel=1e-9, abs=1e-9)

    def test_from_pm1_keeps_both_views(self, rng):
        Pi = random_poly(InstanceSpec(n=4, d=4, seed=7))
        prob = BooleanProblem.from_pm1(Pi)
        for _ in range(10):
            u = rng.uniform(-1, 1, 4)
            assert prob.P.eval((1 + u) / 2) == pytest.approx(Pi.eval(u), rel=1e-9, abs=1e-9)


class TestRecoverX:
    def test_examples(self):
        assert recover_x([1.0, -1.0]).tolist() == [1.0, 0.0]
        assert recover_x([-1.0, -1.0, -1.0]).tolist() == [0.0, 0.0, 0.0]

    def test_rejects_non_sign_input(self):
        with pytest.raises(ValueError):
            recover_x([0.5, 1.0])

    def test_evaluation_cross_check(self, rng):
        P = random_poly(InstanceSpec(n=6, d=3, seed=9))
        prob = to_pm1(P)
        for _ in range(50):
            u = np.where(rng.random(6) < 0.5, -1.0, 1.0)
            assert P.eval(recover_x(u)) == pytest.approx(prob.Pi.eval(u), rel=1e-9, abs=1e-9)


def zero_model(n, epsilon=1e-4, c=0.0):
    return PenaltyModel(BooleanProblem.from_pm1(SparsePoly.zero(n)), epsilon=epsilon, c=c)


class TestPenalty:
    def test_value_at_signs(self):
        model = zero_model(3, epsilon=1e-4, c=2.0)
        u = np.array([1.0, -1.0, 1.0])
        assert model.penalty_value(u) == pytest.approx(2.0 * 3 / 2)

    def test_value_at_origin(self):
        n, eps = 4, 1e-3
        model = zero_model(n, epsilon=eps)
        assert model.penalty_value(np.zeros(n)) == pytest.approx(n / (4 * eps))

    def test_value_matches_reference_sum(self, rng):
        pi = random_poly(InstanceSpec(n=5, d=4, sparsity=0.9, seed=12))
        model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-3, c=7.0)
        for _ in range(10):
            v = rng.uniform(-1.5, 1.5, 5)
            ref = 0.0
            for x in reversed(v):
                ref += (x * x - 1.0) ** 2 / (4 * 1e-3) + 3.5 * x * x
            ref += pi.eval(v)
            assert model.penalty_value(v) == pytest.approx(ref, rel=1e-12)

    def test_gradient_zero_at_equilibria(self):
        model = zero_model(4)
        assert model.penalty_gradient(np.array([1.0, -1.0, -1.0, 1.0])).tolist() == [0.0] * 4
        assert model.penalty_gradient(np.zeros(4)).tolist() == [0.0] * 4

    def test_gradient_matches_finite_differences(self, rng):
        h = 1e-6
        for seed in (13, 14):
            pi = random_poly(InstanceSpec(n=5, d=5, sparsity=0.8, seed=seed))
            model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-3, c=10.0)
            for _ in range(10):
                v = rng.uniform(-1.2, 1.2, 5)
                fd = np.array(
                    [
                        (model.penalty_value(v + h * e) - model.penalty_value(v - h * e)) / (2 * h)
                        for e in np.eye(5)
                    ]
                )
                g = model.penalty_gradient(v)
                assert np.all(np.abs(g - fd) <= 1e-6 * np.maximum(1.0, np.abs(fd)))

    def test_penalty_floor(self, rng):
        pi = random_poly(InstanceSpec(n=4, d=4, seed=15))
        model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-3, c=5.0)
        for _ in range(30):
            v = rng.uniform(-2, 2, 4)
            floor = 2.5 * float(v @ v) + pi.eval(v)
            assert model.penalty_value(v) >= floor - 1e-12
        u = np.array([1.0, 1.0, -1.0, 1.0])
        assert model.penalty_value(u) == pytest.approx(2.5 * 4 + pi.eval(u))

    def test_sign_vectors_are_strict_local_minima_of_pure_penalty(self):
        model = zero_model(3, epsilon=1e-2)
        for bits in np.ndindex(2, 2, 2):
            u = 2.0 * np.array(bits) - 1.0
            H = np.diag((3.0 * u * u - 1.0) / model.epsilon)
            assert np.all(np.diag(H) == pytest.approx(2.0 / model.epsilon))

    def test_validation(self):
        with pytest.raises(ValueError):
            zero_model(3, epsilon=0.0)
        with pytest.raises(ValueError):
            PenaltyModel(BooleanProblem.from_pm1(SparsePoly.zero(4)), epsilon=1e-3, r=1.0)


class TestResidualNorm:
    def test_zero_at_sign_equilibria(self):
        model = zero_model(5)
        assert model.residual_norm(np.array([1.0, 1.0, -1.0, 1.0, -1.0])) == 0.0

    def test_zero_at_origin_with_c(self):
        model = zero_model(3, c=4.0)
        assert model.residual_norm(np.zeros(3)) == 0.0


class TestSuggestC:
    def test_bilinear(self):
        prob = BooleanProblem.from_pm1(
            SparsePoly.from_terms(2, [(((0, 1), (1, 1)), 1.0)])
        )
        assert suggest_c(prob, r=5.0) == pytest.approx(1.0)

    def test_linear_is_zero(self):
        prob = BooleanProblem.from_pm1(SparsePoly.variable(3, 1))
        assert suggest_c(prob, r=2.0) == 0.0

    def test_dominates_sampled_spectral_radius(self, rng):
        pi = random_poly(InstanceSpec(n=4, d=5, sparsity=0.9, seed=17))
        prob = BooleanProblem.from_pm1(pi)
        r = 1.5 * math.sqrt(4)
        c = suggest_c(prob, r)
        X = rng.normal(size=(10_000, 4))
        X *= (r * rng.random(10_000) ** 0.25 / np.linalg.norm(X, axis=1))[:, None]
        worst = max(
            float(np.max(np.abs(np.linalg.eigvalsh(pi.hessian_eval(v))))) for v in X[::20]
        )
        assert c >= worst

    def test_requires_radius_above_sqrt_n(self):
        prob = BooleanProblem.from_pm1(SparsePoly.zero(4))
        with pytest.raises(ValueError):
            suggest_c(prob, r=2.0)
