import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from localadaseg import (
    BilinearProblem,
    ConfigurationError,
    DomainError,
    Iterate,
    RngStream,
    UsageError,
    duality_gap,
    generate_bilinear,
    kkt_residual,
    oracle_eval,
    regret_bound_check,
)

from helpers import brute_force_gap


class ScriptedStream:
    """Hands out fixed arrays from ``uniform`` in call order."""

    def __init__(self, *draws):
        self.draws = [np.array(d, dtype=float) for d in draws]

    def uniform(self, low, high, size):
        out = self.draws.pop(0)
        assert out.shape == np.empty(size).shape
        return out


class TestGenerator:
    def test_normalization_by_largest_shift(self):
        # |b|_max = 0.8, |c|_max = 0.5, Abar entry 0.4 -> A entry 0.4 / 0.8.
        p = generate_bilinear(1, 0.0, ScriptedStream([0.8], [-0.5], [[0.4]]))
        assert p.A[0, 0] == pytest.approx(0.5, rel=1e-15)

    def test_degenerate_shift_is_redrawn(self):
        p = generate_bilinear(1, 0.0, ScriptedStream([0.0], [1e-13], [-0.25], [0.5], [[0.5]]))
        np.testing.assert_array_equal(p.b, [-0.25])
        assert p.A[0, 0] == 1.0

    def test_upper_triangle_is_mirrored(self):
        raw = [[0.1, 0.2], [0.9, 0.3]]
        p = generate_bilinear(2, 0.0, ScriptedStream([0.5, 0.0], [0.0, 0.1], raw))
        np.testing.assert_allclose(p.A, [[0.2, 0.4], [0.4, 0.6]], rtol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_shapes_symmetry_ranges(self, seed):
        p = generate_bilinear(10, 0.1, seed)
        assert p.A.shape == (10, 10) and p.b.shape == (10,) and p.c.shape == (10,)
        np.testing.assert_array_equal(p.A, p.A.T)
        assert np.all(np.abs(p.b) <= 1) and np.all(np.abs(p.c) <= 1)
        scale = max(np.abs(p.b).max(), np.abs(p.c).max())
        assert np.all(np.abs(p.A) <= 1.0 / scale + 1e-15)
        assert p.seed == seed

    def test_reproducible_from_seed_and_stream(self):
        a = generate_bilinear(4, 0.1, 3)
        b = generate_bilinear(4, 0.1, 3)
        np.testing.assert_array_equal(a.A, b.A)
        c = generate_bilinear(4, 0.1, 4)
        assert not np.array_equal(a.A, c.A)
        s1, s2 = RngStream(3, 7), RngStream(3, 7)
        np.testing.assert_array_equal(generate_bilinear(4, 0.1, s1).A, generate_bilinear(4, 0.1, s2).A)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ConfigurationError):
            generate_bilinear(0, 0.1, 0)
        with pytest.raises(ConfigurationError):
            generate_bilinear(2, -0.1, 0)


class TestOracle:
    def test_hand_value(self, xy_game):
        g = oracle_eval(xy_game, Iterate([1.0], [1.0]), RngStream(0, 0))
        assert g == Iterate([1.0], [-1.0])

    def test_noiseless_oracle_is_operator(self, small_instance):
        p = BilinearProblem(small_instance.A, small_instance.b, small_instance.c, sigma=0.0)
        z = np.linspace(-1, 1, 6)
        np.testing.assert_array_equal(p.oracle(z, RngStream(0, 0)), p.operator(z))

    def test_operator_blocks(self, small_instance):
        p = small_instance
        x, y = np.array([0.1, -0.2, 0.3]), np.array([0.5, 0.0, -1.0])
        g = p.operator(np.concatenate((x, y)))
        np.testing.assert_allclose(g[:3], p.A @ y + p.b, rtol=1e-14)
        np.testing.assert_allclose(g[3:], -(p.A.T @ x + p.c), rtol=1e-14)

    def test_single_shared_noise_draw(self, small_instance):
        p = small_instance
        z = np.zeros(6)
        stream = RngStream(11, 0)
        noise = p.oracle(z, stream) - p.operator(z)
        np.testing.assert_allclose(noise[:3], -noise[3:], rtol=0, atol=1e-15)
        np.testing.assert_allclose(noise[:3], RngStream(11, 0).normal(3, 0.1), rtol=1e-12)
        assert stream.counter == 1

    def test_monte_carlo_mean(self):
        p = generate_bilinear(10, 0.1, 5)
        z = np.linspace(-1, 1, 20)
        stream = RngStream(77, 0)
        N = 100_000
        total = np.zeros(20)
        for _ in range(N):
            total += p.oracle(z, stream)
        assert np.all(np.abs(total / N - p.operator(z)) <= 3 * 0.1 / np.sqrt(N))

    def test_variance_convention(self):
        p = BilinearProblem([[1.0]], [0.0], [0.0], sigma=0.25, noise_scale_is_std=False)
        assert p.noise_std == 0.5

    def test_dimension_mismatch(self, small_instance):
        with pytest.raises(ConfigurationError):
            oracle_eval(small_instance, np.zeros(5), RngStream(0, 0))

    def test_bad_shapes(self):
        with pytest.raises(ConfigurationError):
            BilinearProblem(np.eye(2), [0.0], [0.0, 0.0])
        with pytest.raises(ConfigurationError):
            BilinearProblem(np.eye(1), [0.0], [0.0], sigma=-1.0)

    def test_gradient_bound_hint_dominates_observed(self, small_instance):
        p = small_instance
        s = RngStream(0, 0)
        rng = np.random.default_rng(0)
        worst = max(np.linalg.norm(p.oracle(rng.uniform(-1, 1, 6), s)) for _ in range(2000))
        assert worst <= p.gradient_bound_hint


class TestResidual:
    def test_hand_values(self, xy_game):
        assert kkt_residual(xy_game, Iterate([0.0], [0.0])) == 0.0
        # x-term |1 - proj(0)| = 1, y-term |1 - proj(2)| = 0.
        assert kkt_residual(xy_game, Iterate([1.0], [1.0])) == 1.0

    def test_accepts_infeasible_points(self, xy_game):
        assert kkt_residual(xy_game, np.array([3.0, 0.0])) > 0

    @given(arrays(float, 6, elements=st.floats(-3, 3)))
    def test_nonnegative_and_matches_generic(self, z):
        p = generate_bilinear(3, 0.0, 1)
        r = kkt_residual(p, z)
        assert r >= 0
        generic = z - p.feasible_set.project(z - p.operator(z))
        assert r == pytest.approx(np.linalg.norm(generic), rel=1e-12, abs=1e-14)


class TestDualityGap:
    def test_hand_values(self, xy_game):
        assert duality_gap(xy_game, Iterate([0.0], [0.0])) == 0.0
        assert duality_gap(xy_game, Iterate([1.0], [1.0])) == 2.0

    def test_infeasible_point(self, xy_game):
        with pytest.raises(DomainError):
            duality_gap(xy_game, Iterate([1.5], [0.0]))

    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(0)
        for k in range(40):
            p = generate_bilinear(int(rng.integers(1, 5)), 0.0, k)
            z = rng.uniform(-1, 1, 2 * p.n)
            assert duality_gap(p, z) == pytest.approx(brute_force_gap(p, z), abs=1e-10)

    @settings(max_examples=50)
    @given(st.integers(0, 10**6), st.integers(1, 4), st.data())
    def test_nonnegative(self, seed, n, data):
        p = generate_bilinear(n, 0.0, seed)
        z = data.draw(arrays(float, 2 * n, elements=st.floats(-1, 1)))
        assert duality_gap(p, z) >= -1e-12

    def test_zero_iff_residual_zero_on_grid(self, xy_game):
        # F = x*y has the unique saddle (0, 0).
        grid = np.linspace(-1, 1, 21)
        for x in grid:
            for y in grid:
                z = np.array([x, y])
                assert (duality_gap(xy_game, z) == 0) == (kkt_residual(xy_game, z) == 0)
                assert (duality_gap(xy_game, z) == 0) == (x == 0 and y == 0)


class TestRegretBound:
    def test_hand_value_is_tight(self, xy_game):
        gap, sup = regret_bound_check(xy_game, [Iterate([1.0], [1.0])])
        assert (gap, sup) == (2.0, 2.0)

    def test_saddle(self, xy_game):
        gap, sup = regret_bound_check(xy_game, [np.zeros(2)])
        assert gap == 0.0 <= sup

    def test_empty(self, xy_game):
        with pytest.raises(UsageError):
            regret_bound_check(xy_game, [])

    @settings(max_examples=40)
    @given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 8), st.data())
    def test_inequality_on_random_sequences(self, seed, n, T, data):
        p = generate_bilinear(n, 0.0, seed)
        pts = [data.draw(arrays(float, 2 * n, elements=st.floats(-1, 1))) for _ in range(T)]
        gap, sup = regret_bound_check(p, pts)
        assert gap <= sup + 1e-9


class TestSerialization:
    def test_json_roundtrip(self, small_instance):
        q = BilinearProblem.from_json(small_instance.to_json())
        np.testing.assert_array_equal(q.A, small_instance.A)
        np.testing.assert_array_equal(q.b, small_instance.b)
        np.testing.assert_array_equal(q.c, small_instance.c)
        assert (q.sigma, q.seed, q.noise_scale_is_std) == (0.1, 7, True)

    def test_rejects_other_formats(self, small_instance):
        d = small_instance.to_dict()
        with pytest.raises(ConfigurationError):
            BilinearProblem.from_dict({**d, "format": "other"})
        with pytest.raises(ConfigurationError):
            BilinearProblem.from_dict({**d, "version": 99})
        with pytest.raises(ConfigurationError):
            BilinearProblem.from_dict({**d, "n": 4})

    def test_document_fields(self, small_instance):
        d = json.loads(small_instance.to_json())
        assert {"n", "sigma", "A", "b", "c", "seed", "version"} <= set(d)
