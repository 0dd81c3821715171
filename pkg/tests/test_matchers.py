import math

import numpy as np
import pytest

from keydyn.matchers import (
    Score,
    decide,
    score_m1,
    score_m2,
    score_m3,
    score_m4,
    score_m5,
    score_model,
)
from keydyn.enrollment import enroll


class TestScoreM1:
    def test_self_match_is_zero(self):
        assert score_m1((3, 4), (3, 4)).value == 0.0

    def test_orthogonal_unit_vectors(self):
        assert score_m1((0, 1), (1, 0)).value == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_parallel_scaled(self):
        # ||v - u|| / (||v|| ||u||) = sqrt(2) / (2 sqrt(2) * sqrt(2))
        assert score_m1((2, 2), (1, 1)).value == pytest.approx(math.sqrt(2) / 4, abs=1e-12)

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="degenerate_vector"):
            score_m1((0, 0), (1, 1))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            score_m1((1, 2, 3), (1, 2))


class TestScoreM2:
    def test_self_match_is_exactly_zero(self):
        assert score_m2((5, 7, 9), (5, 7, 9), (2, 2, 2)).value == 0.0

    def test_scalar_one_sigma(self):
        assert score_m2((3,), (2,), (1,)).value == pytest.approx(1 - math.exp(-1), abs=1e-12)

    def test_two_components_each_one_sigma(self):
        got = score_m2((110, 220), (100, 200), (10, 20)).value
        assert got == pytest.approx(1 - math.exp(-1), abs=1e-12)

    def test_sigma_floor_handles_zero_std(self):
        # zero std with v != u: floored to 1 ms instead of dividing by zero
        got = score_m2((3,), (2,), (0,)).value
        assert got == pytest.approx(1 - math.exp(-1), abs=1e-12)

    def test_range(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 20))
            v, u = rng.normal(150, 60, n), rng.normal(150, 60, n)
            s = rng.uniform(0, 30, n)
            # mathematically < 1; exp underflow can saturate to exactly 1.0
            assert 0.0 <= score_m2(v, u, s).value <= 1.0


class TestScoreM3:
    def test_exact_member_is_zero(self):
        assert score_m3((10, 10), [(0, 0), (10, 10)]).value == 0.0

    def test_keeps_minimum(self):
        assert score_m3((1, 1), [(0, 0), (10, 10)]).value == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_three_four_five(self):
        assert score_m3((3, 4), [(0, 0)]).value == 5.0

    def test_min_property(self, rng):
        for _ in range(50):
            enrolled = rng.normal(100, 40, size=(5, 6))
            v = rng.normal(100, 40, 6)
            got = score_m3(v, enrolled).value
            for e in enrolled:
                assert got <= np.linalg.norm(e - v) + 1e-12

    def test_empty_enrolled_rejected(self):
        with pytest.raises(ValueError):
            score_m3((1, 2), [])


class TestScoreM4:
    def test_self_match_is_zero(self):
        assert score_m4((1, 2), (1, 2)).value == 0.0

    def test_componentwise(self):
        assert score_m4((3, 5), (1, 2)).value == 13.0

    def test_three_four_five_squared(self):
        assert score_m4((3, 4), (0, 0)).value == 25.0

    def test_equals_m3_squared_for_single_vector(self, rng):
        for _ in range(50):
            u = rng.normal(100, 40, 8)
            v = rng.normal(100, 40, 8)
            assert score_m4(v, u).value == pytest.approx(score_m3(v, [u]).value ** 2, rel=1e-12)


class TestScoreM5:
    def test_parallel_vectors_score_zero(self):
        assert score_m5((6, 8), [(3, 4)]).value == 0.0

    def test_swapped_components(self):
        # u_hat=(0.6,0.8), v_hat=(0.8,0.6): sqrt(0.04/0.36 + 0.04/0.64)
        got = score_m5((4, 3), [(3, 4)]).value
        assert got == pytest.approx(math.sqrt(0.04 / 0.36 + 0.04 / 0.64), abs=1e-12)
        assert got == pytest.approx(5.0 / 12.0, abs=1e-9)

    def test_unit_axis_self_match(self):
        assert score_m5((1, 0), [(1, 0)]).value == 0.0

    def test_scale_invariance(self, rng):
        for _ in range(50):
            enrolled = rng.uniform(10, 300, size=(5, 6))
            v = rng.uniform(10, 300, 6)
            c = float(rng.uniform(0.1, 10))
            assert score_m5(c * v, enrolled).value == pytest.approx(
                score_m5(v, enrolled).value, rel=1e-9
            )

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="degenerate_vector"):
            score_m5((0, 0), [(1, 1)])
        with pytest.raises(ValueError, match="degenerate_vector"):
            score_m5((1, 1), [(0, 0)])


class TestDecide:
    def test_reference_operating_point(self):
        # 0.28 is the default on-line threshold for M5-style deployments
        assert decide(Score(0.27, "M5"), 0.28).accepted
        assert not decide(Score(0.29, "M5"), 0.28).accepted

    def test_zero_score_always_accepted(self):
        assert decide(score_m4((1, 2), (1, 2)), 0.0).accepted

    def test_tie_accepts(self):
        s = score_m4((3, 5), (1, 2))  # 13.0
        assert decide(s, 13.0).accepted
        assert not decide(s, 12.999999).accepted

    def test_monotone(self, rng):
        threshold = 5.0
        prev_accepted = True
        for value in sorted(rng.uniform(0, 10, 50)):
            d = decide(score_m4((value**0.5, 0), (0, 0)), threshold)
            # once rejected, larger scores stay rejected
            if not prev_accepted:
                assert not d.accepted
            prev_accepted = d.accepted


class TestScoreModel:
    def test_dispatch_matches_direct_calls(self, rng):
        vectors = rng.uniform(50, 300, size=(5, 6))
        v = rng.uniform(50, 300, 6)
        for method in ("M1", "M2", "M3", "M4", "M5"):
            model = enroll("u", vectors, "V", method, "static")
            got = score_model(model, v)
            assert got.method_id == method
            if method == "M1":
                assert got.value == score_m1(v, model.mean).value
            elif method == "M2":
                assert got.value == score_m2(v, model.mean, model.std).value
            elif method == "M3":
                assert got.value == score_m3(v, model.enrolled).value
            elif method == "M4":
                assert got.value == score_m4(v, model.mean).value
            else:
                assert got.value == score_m5(v, model.enrolled).value

    def test_self_match_zero_on_single_vector_enrollment(self, rng):
        v = rng.uniform(50, 300, 10)
        for method in ("M1", "M2", "M3", "M4", "M5"):
            model = enroll("u", [v], "V", method, "static")
            assert score_model(model, v).value == 0.0
