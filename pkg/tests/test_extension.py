import warnings

import numpy as np
import pytest
from scipy.special import fresnel

from complexlab import linalg
from complexlab.extension import (
    DomainBox,
    Gaussian,
    Indicator,
    PolynomialAmplitude,
    QuadratureError,
    QuadratureSpec,
    Tabulated,
    decay_fit,
    extend,
    extend_batch,
    parabolic_rescale_check,
    real_expansion,
    required_points,
    rescale_radius_limit,
    rescaled_frequency,
)
from complexlab.surface import HolomorphicPolynomial as HP

GL = QuadratureSpec(rule="gauss-legendre")


def fresnel_integral(s: float) -> complex:
    """int_{-1}^{1} exp(i s x^2) dx for s > 0."""
    z = np.sqrt(2 * s / np.pi)
    S, C = fresnel(z)
    return 2 * np.sqrt(np.pi / (2 * s)) * (C + 1j * S)


class TestDomain:
    def test_cube(self):
        box = DomainBox.cube(0.3 + 0.1j, 0.2)
        np.testing.assert_allclose(box.center, [0.3, 0.1])
        np.testing.assert_allclose(box.half_widths, [0.1, 0.1])
        assert box.volume == pytest.approx(0.04)

    def test_half_width_cap(self):
        with pytest.raises(ValueError):
            DomainBox(np.zeros(2), 2.5)


def test_real_expansion_z_squared():
    # z^2 = x^2 - y^2 + 2ixy
    assert real_expansion(HP(1, {(2,): 1})) == {(2, 0): 1, (0, 2): -1, (1, 1): 2j}


class TestExtend:
    def test_zero_frequency_is_measure(self, rng):
        for m in (1, 2):
            phi = HP.random(m, 3, rng)
            box = DomainBox(np.zeros(2 * m), rng.uniform(0.2, 1.5, 2 * m))
            assert extend(phi, box, Indicator(), np.zeros(2 * m + 2)) == pytest.approx(box.volume, rel=1e-12)

    @pytest.mark.parametrize("m", [1, 2])
    def test_gaussian_closed_form(self, m, rng):
        sigma = 0.15
        phi = HP.random(m, 3, rng)
        box = DomainBox(np.zeros(2 * m), 1.0)
        for _ in range(3):
            wh = rng.uniform(-10, 10, 2 * m)
            w = np.concatenate([wh, [0.0, 0.0]])
            exact = (2 * np.pi * sigma**2) ** m * np.exp(-(sigma**2) * wh @ wh / 2)
            assert abs(extend(phi, box, Gaussian(sigma), w) - exact) <= 1e-6

    @pytest.mark.parametrize("s", [0.5, 3.0, 17.0])
    def test_fresnel_oracle(self, s):
        box = DomainBox(np.zeros(2), 1.0)
        val = extend(HP(1, {(2,): 1}), box, Indicator(), np.array([0, 0, s, 0.0]), GL)
        F = fresnel_integral(s)
        assert abs(val - F * np.conj(F)) <= 1e-6

    def test_trivial_bound(self, rng):
        phi = HP.random(1, 3, rng)
        box = DomainBox(np.zeros(2), 1.0)
        f = Gaussian(0.4)
        total = abs(extend(phi, box, f, np.zeros(4)))
        for _ in range(20):
            assert abs(extend(phi, box, f, rng.uniform(-30, 30, 4))) <= total * (1 + 1e-9)

    def test_conjugate_symmetry(self, rng):
        phi = HP.random(2, 2, rng)
        box = DomainBox(np.zeros(4), 0.5)
        w = rng.uniform(-3, 3, 6)
        a = extend(phi, box, Gaussian(0.3), w)
        b = extend(phi, box, Gaussian(0.3), -w)
        assert abs(a - np.conj(b)) <= 1e-12 * max(1, abs(a))

    def test_under_resolved(self):
        phi = HP(1, {(2,): 1})
        box = DomainBox(np.zeros(2), 1.0)
        w = np.array([0, 0, 50.0, 0])
        need = int(required_points(phi, box, w, 8).max())
        with pytest.raises(QuadratureError, match=str(need)):
            extend(phi, box, Indicator(), w, QuadratureSpec(points_per_axis=10))

    def test_resolution_invariant(self, rng):
        phi = HP.random(1, 3, rng)
        box = DomainBox(np.zeros(2), 1.0)
        w = rng.uniform(-10, 10, 4)
        need = int(required_points(phi, box, w, 8).max())
        # midpoint: O(h^2), so doubling the resolution moves the value only slightly
        auto = extend(phi, box, Gaussian(0.3), w)
        fine = extend(phi, box, Gaussian(0.3), w, QuadratureSpec(points_per_axis=2 * need))
        assert abs(auto - fine) <= 1e-3 * abs(fine)
        # Gauss-Legendre is already converged at the minimal count
        gl = extend(phi, box, Gaussian(0.3), w, GL)
        gl2 = extend(phi, box, Gaussian(0.3), w, QuadratureSpec(points_per_axis=2 * need, rule="gauss-legendre"))
        assert abs(gl - gl2) <= 1e-10 * abs(gl2)

    def test_coupled_amplitudes(self, rng):
        # polynomial and tabulated amplitudes force joint coordinate groups
        phi = HP(1, {(2,): 1})
        box = DomainBox(np.zeros(2), 1.0)
        w = np.array([1.0, -2.0, 3.0, 0.5])
        poly = PolynomialAmplitude({(1, 1): 1.0, (0, 0): 2.0})
        axes = (np.linspace(-1, 1, 201), np.linspace(-1, 1, 201))
        X, Y = np.meshgrid(*axes, indexing="ij")
        tab = Tabulated(axes, X * Y + 2.0)
        a = extend(phi, box, poly, w, GL)
        b = extend(phi, box, tab, w, QuadratureSpec(points_per_axis=200))
        assert abs(a - b) <= 1e-3
        # independent trapezoid oracle on a fine grid
        xs = np.linspace(-1, 1, 4001)
        xx, yy = np.meshgrid(xs, xs, indexing="ij")
        fx = np.exp(1j * (w[0] * xx + w[1] * yy + w[2] * (xx**2 - yy**2) + w[3] * 2 * xx * yy)) * (xx * yy + 2)
        ref = np.trapezoid(np.trapezoid(fx, xs, axis=1), xs)
        assert abs(a - ref) <= 1e-5

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            extend(HP(1, {(2,): 1}), DomainBox(np.zeros(2), 1.0), Indicator(), np.zeros(3))


class TestDecay:
    def test_n2(self):
        res = decay_fit(HP(1, {(2,): 1}), Gaussian(0.25))
        assert -1.2 <= res.exponent <= -0.8
        assert len(res.t_values) >= 6 and np.isfinite(res.residual)

    @pytest.mark.slow
    def test_n3(self):
        res = decay_fit(HP.sum_of_squares(2), Gaussian(0.25))
        assert -2.3 <= res.exponent <= -1.7

    def test_zero_phase(self):
        res = decay_fit(HP(1, {}), Gaussian(0.25))
        assert abs(res.exponent) <= 0.05

    def test_indicator_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            decay_fit(HP(1, {(2,): 1}), Indicator(), t_values=[8, 12, 18, 27, 40, 60], quad=GL)
        assert any("boundary" in str(c.message) for c in caught)

    def test_too_few_t(self):
        with pytest.raises(ValueError):
            decay_fit(HP(1, {(2,): 1}), Gaussian(0.25), t_values=[1, 2, 3])


class TestRescale:
    def test_identity_case(self, rng):
        lhs, rhs = parabolic_rescale_check(np.eye(1), 0, 1.0, Gaussian(0.3), rng.uniform(-5, 5, 4))
        assert lhs == rhs

    def test_example(self, rng):
        f = Gaussian(0.05, center=linalg.realify(np.array([0.31 + 0.09j])))
        for _ in range(5):
            w = rng.normal(size=4)
            w *= rng.uniform(0, 20) / np.linalg.norm(w)
            lhs, rhs = parabolic_rescale_check(np.eye(1), 0.3 + 0.1j, 0.1, f, w)
            assert abs(lhs - rhs) <= 1e-6 * max(lhs, rhs)

    def test_zero_frequency(self):
        lhs, rhs = parabolic_rescale_check(np.eye(1), 0.3 + 0.1j, 0.1, Indicator(), np.zeros(4))
        assert lhs == pytest.approx(0.01, rel=1e-12) and rhs == pytest.approx(lhs, rel=1e-12)

    def test_radius_limit(self):
        M = np.eye(1)
        assert rescale_radius_limit(M, 2) == pytest.approx(1 / (2 * 3))
        with pytest.raises(ValueError):
            parabolic_rescale_check(M, 0.1, 0.2, Indicator(), np.zeros(4))

    def test_rescaled_frequency(self):
        wt = rescaled_frequency(np.eye(1), 0.5, 0.1, np.array([1.0, 0, 2.0, 0]))
        # head: r (w' + w_n conj(2 M a)) = 0.1 (1 + 2 * 1) = 0.3
        np.testing.assert_allclose(wt, [0.3, 0, 0.02, 0])

    def test_random_instances_n3(self, rng):
        for _ in range(3):
            A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            M = (A + A.T) / 4
            r = 0.5 * rescale_radius_limit(M, 3)
            a = 0.2 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
            f = Gaussian(r / 3, center=linalg.realify(a))
            w = rng.uniform(-3, 3, 6)
            lhs, rhs = parabolic_rescale_check(M, a, r, f, w)
            assert abs(lhs - rhs) <= 1e-6 * max(lhs, rhs)


def test_batch_matches_pointwise(rng):
    phi = HP.random(1, 3, rng)
    box = DomainBox(np.zeros(2), 0.5)
    ws = rng.uniform(-6, 6, (5, 4))
    q = QuadratureSpec(points_per_axis=80)
    batch = extend_batch(phi, box, Gaussian(0.2), ws, q)
    single = [extend(phi, box, Gaussian(0.2), w, q) for w in ws]
    np.testing.assert_allclose(batch, single, rtol=1e-10, atol=1e-13)
    with pytest.raises(QuadratureError):
        extend_batch(phi, box, Gaussian(0.2), ws * 100, q)
