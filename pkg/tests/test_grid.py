"""Spectral substrate: grids, fields, multiplier operators, norms."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strato.grid import (
    GridSpec,
    ScalarField,
    VelocityField,
    biot_savart,
    calderon_zygmund_ratio,
    derivative,
    dx1_inv_laplacian,
    heat_propagate,
    laplacian,
    lp_norm,
    sample_at,
    velocity_gradient_sup,
)
from conftest import random_field


class TestGridSpec:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            GridSpec(n=100, half_length=8.0)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            GridSpec(n=8, half_length=8.0)

    def test_rejects_bad_box(self):
        with pytest.raises(ValueError):
            GridSpec(n=64, half_length=0.0)

    def test_spacing_and_nodes(self, grid64):
        assert grid64.dx == pytest.approx(0.25)
        assert grid64.nodes[0] == -8.0
        assert grid64.nodes[-1] == pytest.approx(8.0 - 0.25)

    def test_wavenumber_layout(self, grid64):
        assert grid64.k1.shape == (64, 1)
        assert grid64.k2.shape == (1, 64)
        # fundamental wavenumber is pi / L
        assert grid64.k1[1, 0] == pytest.approx(np.pi / 8.0)
        assert grid64.inv_ksq[0, 0] == 0.0

    def test_dealias_keeps_low_and_kills_high(self, grid64):
        mask = grid64.dealias_mask
        assert mask[0, 0]
        assert mask[grid64.n // 3, 0]
        assert not mask[grid64.n // 3 + 1, 0]
        assert not mask[grid64.n // 2, 0]


class TestScalarField:
    def test_rejects_wrong_shape(self, grid64):
        with pytest.raises(ValueError):
            ScalarField(grid64, np.zeros((32, 32)))

    def test_rejects_nonfinite(self, grid64):
        bad = np.zeros((64, 64))
        bad[3, 3] = np.nan
        with pytest.raises(ValueError):
            ScalarField(grid64, bad)

    def test_spectrum_round_trip(self, grid64):
        f = random_field(grid64, 0)
        g = ScalarField.from_spectrum(grid64, f.spectrum)
        assert np.allclose(g.values, f.values, atol=1e-13)

    def test_values_read_only(self, grid64):
        f = random_field(grid64, 1)
        with pytest.raises(ValueError):
            f.values[0, 0] = 3.0


class TestDerivatives:
    def test_first_derivative_exact_on_modes(self, grid128):
        k = np.pi / 8.0
        f = ScalarField.from_function(grid128, lambda x1, x2: np.sin(3 * k * x1) * np.cos(2 * k * x2))
        d1 = derivative(f, 1)
        want = ScalarField.from_function(grid128, lambda x1, x2: 3 * k * np.cos(3 * k * x1) * np.cos(2 * k * x2))
        assert np.abs(d1.values - want.values).max() < 1e-12

    def test_axis_two(self, grid128):
        k = np.pi / 8.0
        f = ScalarField.from_function(grid128, lambda x1, x2: np.cos(5 * k * x2))
        d2 = derivative(f, 2)
        want = ScalarField.from_function(grid128, lambda x1, x2: -5 * k * np.sin(5 * k * x2))
        assert np.abs(d2.values - want.values).max() < 1e-12

    def test_bad_axis(self, grid64):
        with pytest.raises(ValueError):
            derivative(random_field(grid64, 2), 3)

    def test_laplacian_matches_eigenvalue(self, grid128):
        k = np.pi / 8.0
        f = ScalarField.from_function(grid128, lambda x1, x2: np.sin(3 * k * x1) * np.cos(2 * k * x2))
        lap = laplacian(f)
        assert np.abs(lap.values + 13 * k * k * f.values).max() < 1e-11

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_derivative_linear(self, seed):
        g = GridSpec(n=32, half_length=4.0)
        a = random_field(g, seed)
        b = random_field(g, seed + 1)
        lhs = derivative(ScalarField(g, 2.0 * a.values - b.values), 1).values
        rhs = 2.0 * derivative(a, 1).values - derivative(b, 1).values
        assert np.abs(lhs - rhs).max() < 1e-10


class TestBiotSavart:
    def test_curl_recovers_zero_mean_vorticity(self, grid128):
        w = random_field(grid128, 3, band=6.0)
        v = biot_savart(w)
        curl = derivative(v.u2, 1).values - derivative(v.u1, 2).values
        centered = w.values - w.values.mean()
        assert np.abs(curl - centered).max() < 1e-11

    def test_divergence_free(self, grid128):
        w = random_field(grid128, 4, band=6.0)
        v = biot_savart(w)
        div = derivative(v.u1, 1).values + derivative(v.u2, 2).values
        assert np.abs(div).max() < 1e-11

    def test_positive_blob_spins_counterclockwise(self, grid128):
        w = ScalarField.from_function(grid128, lambda x1, x2: np.exp(-(x1**2 + x2**2)))
        v = biot_savart(w)
        i = int(np.argmin(np.abs(grid128.nodes - 1.0)))
        j = int(np.argmin(np.abs(grid128.nodes)))
        assert v.u2.values[i, j] > 0.0
        assert v.u1.values[j, i] < 0.0

    def test_single_mode_closed_form(self, grid128):
        # omega = sin(k.x) has stream function -sin(k.x)/|k|^2, so the
        # perpendicular gradient gives v = (k2, -k1) cos(k.x) / |k|^2
        k1, k2 = 3 * np.pi / 8.0, 2 * np.pi / 8.0
        ksq = k1 * k1 + k2 * k2
        w = ScalarField.from_function(grid128, lambda x1, x2: np.sin(k1 * x1 + k2 * x2))
        v = biot_savart(w)
        want1 = ScalarField.from_function(grid128, lambda x1, x2: k2 / ksq * np.cos(k1 * x1 + k2 * x2))
        want2 = ScalarField.from_function(grid128, lambda x1, x2: -k1 / ksq * np.cos(k1 * x1 + k2 * x2))
        assert np.abs(v.u1.values - want1.values).max() < 1e-13
        assert np.abs(v.u2.values - want2.values).max() < 1e-13

    def test_gaussian_azimuthal_profile(self, grid256):
        # free-space closed form v_theta = (1 - exp(-r^2)) / (2 r), corrected
        # for the gauged zero mode: the periodic inversion sees the vorticity
        # minus its mean, which adds a solid-body term -mean * r / 2
        w = ScalarField.from_function(grid256, lambda x1, x2: np.exp(-(x1**2 + x2**2)))
        v = biot_savart(w)
        mean = w.values.mean()
        j = int(np.argmin(np.abs(grid256.nodes)))
        for r in (0.5, 1.0, 2.0):
            i = int(np.argmin(np.abs(grid256.nodes - r)))
            rr = grid256.nodes[i]
            want = (1.0 - np.exp(-(rr**2))) / (2.0 * rr) - 0.5 * mean * rr
            assert v.u2.values[i, j] == pytest.approx(want, rel=0.005)

    def test_gradient_sup_single_mode(self, grid128):
        # omega = 2k^2 sin(kx1) sin(kx2) comes from the stream function
        # psi = sin(kx1) sin(kx2), whose gradient tensor has Frobenius
        # magnitude k^2 sqrt(2) * max over phases = sqrt(2) k^2
        k = np.pi / 8.0
        w = ScalarField.from_function(grid128, lambda x1, x2: 2 * k * k * np.sin(k * x1) * np.sin(k * x2))
        got = velocity_gradient_sup(w)
        assert got == pytest.approx(np.sqrt(2.0) * k * k, rel=1e-6)


class TestSingularIntegral:
    def test_laplacian_of_output_is_dx1(self, grid128):
        rho = random_field(grid128, 5, band=6.0)
        u = dx1_inv_laplacian(rho)
        lap = laplacian(u)
        d1 = derivative(rho, 1)
        assert np.abs(lap.values - d1.values).max() < 1e-11

    def test_zero_mode_removed(self, grid64):
        rho = ScalarField(grid64, np.full((64, 64), 3.7))
        u = dx1_inv_laplacian(rho)
        assert np.abs(u.values).max() < 1e-14

    def test_order_zero_boundedness(self, grid128):
        # the operator has a degree-zero symbol, so L2 norms never grow
        for seed in range(4):
            rho = random_field(grid128, 60 + seed)
            u = dx1_inv_laplacian(rho)
            assert lp_norm(u, 2.0) <= lp_norm(rho, 2.0) + 1e-12


class TestLpNorms:
    def test_constant_field(self, grid64):
        c = ScalarField(grid64, np.full((64, 64), -2.0))
        area = (2 * grid64.half_length) ** 2
        assert lp_norm(c, 1.0) == pytest.approx(2.0 * area)
        assert lp_norm(c, 2.0) == pytest.approx(2.0 * np.sqrt(area))
        assert lp_norm(c, np.inf) == pytest.approx(2.0)

    def test_rejects_sub_one(self, grid64):
        with pytest.raises(ValueError):
            lp_norm(random_field(grid64, 6), 0.5)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.sampled_from([1.0, 2.0, 4.0, np.inf]))
    def test_triangle_and_scaling(self, seed, p):
        g = GridSpec(n=32, half_length=4.0)
        a = random_field(g, seed)
        b = random_field(g, seed + 77)
        s = ScalarField(g, a.values + b.values)
        assert lp_norm(s, p) <= lp_norm(a, p) + lp_norm(b, p) + 1e-10
        assert lp_norm(ScalarField(g, -3.0 * a.values), p) == pytest.approx(3.0 * lp_norm(a, p))


class TestHeatPropagate:
    def test_gaussian_spreads_exactly(self, grid128):
        a = 0.5
        tau = 0.3
        f0 = ScalarField.from_function(grid128, lambda x1, x2: np.exp(-(x1**2 + x2**2) / (4 * a)))
        got = heat_propagate(f0, tau)
        want = ScalarField.from_function(
            grid128, lambda x1, x2: a / (a + tau) * np.exp(-(x1**2 + x2**2) / (4 * (a + tau)))
        )
        # limited only by periodic-image truncation of the gaussian tails
        assert np.abs(got.values - want.values).max() < 1e-8

    def test_semigroup(self, grid64):
        f = random_field(grid64, 7)
        one = heat_propagate(heat_propagate(f, 0.2), 0.3)
        two = heat_propagate(f, 0.5)
        assert np.abs(one.values - two.values).max() < 1e-12

    def test_zero_time_identity(self, grid64):
        f = random_field(grid64, 8)
        assert np.abs(heat_propagate(f, 0.0).values - f.values).max() < 1e-14

    def test_rejects_backward(self, grid64):
        with pytest.raises(ValueError):
            heat_propagate(random_field(grid64, 9), -0.1)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0.01, max_value=2.0))
    def test_sup_never_grows(self, seed, tau):
        g = GridSpec(n=32, half_length=4.0)
        f = random_field(g, seed, band=4.0)
        assert lp_norm(heat_propagate(f, tau), np.inf) <= lp_norm(f, np.inf) * (1.0 + 1e-9)


class TestCalderonZygmund:
    def test_frozen_gaussian_value(self, grid128):
        w = ScalarField.from_function(grid128, lambda x1, x2: np.exp(-(x1**2 + x2**2)))
        assert calderon_zygmund_ratio(w, 4.0) == pytest.approx(0.7302233307382394, rel=1e-8)

    def test_bounded_p_growth_on_corpus(self, grid128):
        # ratio should stay O(p) with a modest constant (symbol is degree zero)
        for seed in (21, 22, 23):
            w = random_field(grid128, seed, band=8.0)
            for p in (1.5, 2.0, 4.0, 8.0):
                r = calderon_zygmund_ratio(w, p)
                assert r <= 4.0 * max(p, p / (p - 1.0))

    def test_rejects_endpoints(self, grid64):
        w = random_field(grid64, 10, band=4.0)
        with pytest.raises(ValueError):
            calderon_zygmund_ratio(w, 1.0)
        with pytest.raises(ValueError):
            calderon_zygmund_ratio(w, np.inf)


class TestOffGridSampling:
    def test_matches_closed_form_between_nodes(self, grid64):
        k = np.pi / 8.0
        f = ScalarField.from_function(grid64, lambda x1, x2: np.sin(2 * k * x1) * np.cos(k * x2))
        rng = np.random.default_rng(31)
        pts = rng.uniform(-8.0, 8.0, size=(40, 2))
        got = sample_at(f, pts)
        want = np.sin(2 * k * pts[:, 0]) * np.cos(k * pts[:, 1])
        assert np.abs(got - want).max() < 1e-11

    def test_grid_points_reproduced(self, grid64):
        f = random_field(grid64, 13)
        pts = np.array([[grid64.nodes[5], grid64.nodes[9]], [grid64.nodes[0], grid64.nodes[63]]])
        got = sample_at(f, pts)
        want = np.array([f.values[5, 9], f.values[0, 63]])
        assert np.abs(got - want).max() < 1e-10

    def test_large_batches_use_interpolation(self, grid64):
        k = np.pi / 8.0
        f = ScalarField.from_function(grid64, lambda x1, x2: np.sin(k * x1))
        rng = np.random.default_rng(32)
        pts = rng.uniform(-8.0, 8.0, size=(800, 2))
        got = sample_at(f, pts)
        want = np.sin(k * pts[:, 0])
        assert np.abs(got - want).max() < 1e-4


class TestVelocityField:
    def test_grid_mismatch_rejected(self, grid64, grid128):
        a = random_field(grid64, 14)
        b = random_field(grid128, 15)
        with pytest.raises(ValueError):
            VelocityField(a, b)

    def test_magnitude(self, grid64):
        a = random_field(grid64, 16)
        b = random_field(grid64, 17)
        v = VelocityField(a, b)
        assert np.allclose(v.magnitude, np.hypot(a.values, b.values))
