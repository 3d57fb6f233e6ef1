import itertools
import math

import numpy as np
import pytest

from boolflow import (
    BooleanProblem,
    InstanceSpec,
    PenaltyModel,
    SparsePoly,
    bound_certificate,
    delta,
    errobj,
    exhaustive_min,
    random_poly,
    round_to_signs,
    sign_alignment_check,
)


def reversed_enumeration(poly):
    """Independent oracle: walk sign vectors in reversed index order."""
    n = poly.nvars
    best_val, best_u, count = math.inf, None, 0
    for idx in range(2**n - 1, -1, -1):
        u = np.array(
            [2.0 * ((idx >> (n - 1 - j)) & 1) - 1.0 for j in range(n)]
        )
        val = poly.eval(u)
        if val < best_val:
            best_val, best_u, count = val, u, 1
        elif val == best_val:
            count += 1
            best_u = u  # reversed order: the last hit is the lex-smallest
    return best_val, best_u, count


class TestExhaustiveMin:
    def test_sum_of_variables(self):
        n = 5
        pi = SparsePoly.from_terms(n, [(((i, 1),), 1.0) for i in range(n)])
        res = exhaustive_min(pi)
        assert res.value == -float(n)
        assert np.all(res.u_star == -1.0)
        assert res.count == 1
        assert res.size == 2**n

    def test_negative_product_two_optima(self):
        pi = SparsePoly.from_terms(2, [(((0, 1), (1, 1)), -1.0)])
        res = exhaustive_min(pi)
        assert res.value == -1.0
        assert res.count == 2
        assert res.contains(pi, [1.0, 1.0]) and res.contains(pi, [-1.0, -1.0])

    @pytest.mark.parametrize("seed", [51, 52, 53])
    def test_agrees_with_reversed_enumeration(self, seed):
        pi = random_poly(InstanceSpec(n=8, d=5, sparsity=0.8, seed=seed))
        res = exhaustive_min(pi)
        val, u, count = reversed_enumeration(pi)
        assert res.value == val
        assert res.count == count
        assert np.array_equal(res.u_star, u)

    def test_guard_rejects_large_n(self):
        pi = SparsePoly.zero(30)
        with pytest.raises(ValueError, match="2\\^30"):
            exhaustive_min(pi)
        # configurable guard
        assert exhaustive_min(SparsePoly.zero(4), max_n=4).value == 0.0


class TestRoundToSigns:
    def test_examples(self):
        assert round_to_signs([0.9, -1.1]).tolist() == [1.0, -1.0]
        assert round_to_signs([0.0, -0.0]).tolist() == [1.0, 1.0]

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            round_to_signs([math.nan, 1.0])
        with pytest.raises(ValueError):
            round_to_signs([math.inf, 1.0])

    def test_matches_brute_force_nearest(self, rng):
        for _ in range(100):
            u = rng.uniform(-2, 2, 8)
            r = round_to_signs(u)
            best = min(
                (np.linalg.norm(u - np.array(s)) for s in itertools.product((-1.0, 1.0), repeat=8)),
            )
            assert np.linalg.norm(u - r) == pytest.approx(best, rel=1e-12)


class TestDelta:
    def test_hand_example(self):
        assert delta([0.9, -1.1]) == pytest.approx(math.sqrt(0.02))

    def test_zero_on_sign_vectors(self):
        assert delta([1.0, -1.0, 1.0]) == 0.0

    def test_minimum_over_all_sign_vectors(self, rng):
        for _ in range(20):
            u = rng.uniform(-2, 2, 6)
            dists = [
                np.linalg.norm(u - np.array(s))
                for s in itertools.product((-1.0, 1.0), repeat=6)
            ]
            assert delta(u) <= min(dists) + 1e-12


class TestErrObj:
    def test_exact_match_is_zero(self):
        pi = SparsePoly.from_terms(2, [(((0, 1),), -5.0), (((1, 1),), -5.0)])
        oracle = exhaustive_min(pi)
        assert errobj(pi, np.array([0.9, 0.9]) * 1.0, oracle) >= 0.0
        assert errobj(pi, np.array([1.0, 1.0]), oracle) == 0.0

    def test_formula(self):
        pi = SparsePoly.from_terms(1, [(((0, 1),), 5.0)])  # min -5 at u=-1; at +1 value 5
        oracle = exhaustive_min(pi)
        assert oracle.value == -5.0
        assert errobj(pi, np.array([0.9]), oracle) == pytest.approx(10.0 / 6.0)

    @pytest.mark.parametrize("seed", [61, 62])
    def test_zero_iff_rounding_is_optimal(self, seed, rng):
        pi = random_poly(InstanceSpec(n=6, d=4, sparsity=0.9, seed=seed))
        oracle = exhaustive_min(pi)
        for _ in range(20):
            u = rng.uniform(-1.5, 1.5, 6)
            e = errobj(pi, u, oracle)
            assert e >= 0.0
            if e == 0.0:
                assert oracle.contains(pi, round_to_signs(u))


class TestBoundCertificate:
    def test_direct_formula(self):
        # With G = grad bound, eps=1e-4, c=100, n=4: (4e-4/1.02) * (200 + G)
        pi = SparsePoly.from_terms(4, [(((i, 1),), 5.0) for i in range(4)])
        model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-4, c=100.0)
        cert = bound_certificate(model)
        G = pi.grad_norm_bound(model.r)
        assert G == pytest.approx(10.0)  # 2-norm of (5,5,5,5)
        assert cert.grad_bound == pytest.approx(G)
        expected = (4e-4 / (1 + 2 * 100.0 * 1e-4)) * (100.0 * 2.0 + G)
        assert cert.delta_bar == pytest.approx(expected)
        assert cert.simplified_bound == pytest.approx(4 * (100.0 + G / 2.0) * 2.0 * 1e-4)

    def test_simplified_dominates_sharp(self):
        pi = random_poly(InstanceSpec(n=5, d=4, seed=71))
        model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-4, c=100.0)
        cert = bound_certificate(model)
        assert cert.delta_bar <= 4 * model.epsilon * (model.c * math.sqrt(5) + cert.grad_bound)
        assert cert.delta_bar <= cert.simplified_bound
        assert cert.delta_bar > 0

    def test_c_zero_degenerates(self):
        pi = random_poly(InstanceSpec(n=3, d=3, seed=72))
        model = PenaltyModel(BooleanProblem.from_pm1(pi), epsilon=1e-5, c=0.0)
        cert = bound_certificate(model)
        assert cert.delta_bar == pytest.approx(4 * 1e-5 * cert.grad_bound)


class TestSignAlignment:
    def test_examples(self):
        assert sign_alignment_check([0.9, -1.1]) is True
        assert sign_alignment_check([-0.1, -0.1]) is True

    def test_zero_coordinate_is_inconclusive(self):
        assert sign_alignment_check([0.0, 1.0]) is None

    def test_alignment_and_enumeration_agree(self, rng):
        for _ in range(100):
            u = rng.uniform(-2, 2, 8)
            if np.any(u == 0.0):
                continue
            assert sign_alignment_check(u) is True
            r = round_to_signs(u)
            best = min(
                itertools.product((-1.0, 1.0), repeat=8),
                key=lambda s: np.linalg.norm(u - np.array(s)),
            )
            assert np.array_equal(r, np.array(best))
            assert np.all(r * u >= 0.0)
