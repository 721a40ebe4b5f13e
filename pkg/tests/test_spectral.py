import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gstable.gslaw import GammaParams, StableParams, gamma_density, gs_charfn, levy_fp_density
from gstable.spectral import (DensityField, Grid1D, QuadratureError, apply_multiplier, forward, gamma_density_field,
                              gs_density, hurwitz_zeta, inverse, invert_charfn, quadrature_subordinate,
                              stable_density)

GRID = Grid1D.default()


def test_grid_validation_and_geometry():
    g = Grid1D(-1.0, 1.0, 16)
    assert g.h == 0.125
    assert g.x[0] == -1.0 and g.x[-1] == pytest.approx(0.875)
    assert g.refined().n_points == 32
    for bad in [(-1, 1, 12), (-1, 1, 4), (1, -1, 16)]:
        with pytest.raises(ValueError):
            Grid1D(*bad)


@pytest.mark.parametrize("s,q", [(0.5, 1.0), (-0.5, 1.0), (0.5, 2.5), (-0.5, 2.5), (-1.7, 1.3), (2.5, 1.1)])
def test_hurwitz_zeta_against_mpmath(s, q):
    assert hurwitz_zeta(s, np.array([q]))[0] == pytest.approx(float(mpmath.zeta(s, q)), rel=1e-13)


def test_hurwitz_zeta_frozen():
    assert hurwitz_zeta(0.5, np.array([1.0]))[0] == pytest.approx(-1.4603545088095868, rel=1e-14)


def test_forward_inverse_roundtrip():
    rng = np.random.default_rng(3)
    g = Grid1D(-5.0, 3.0, 64)
    v = rng.normal(size=64)
    np.testing.assert_allclose(inverse(forward(v, g), g).real, v, atol=1e-13)


def test_forward_matches_gaussian_transform():
    g = Grid1D(-20.0, 20.0, 512)
    f = np.exp(-g.x ** 2 / 2) / math.sqrt(2 * math.pi)
    theta = g.spectral().theta
    np.testing.assert_allclose(forward(f, g), np.exp(-theta ** 2 / 2), atol=1e-14)


def test_laplace_density():
    field = gs_density(StableParams(2.0, 0.0, 1.0), GRID, 1.0)
    err = np.max(np.abs(field.values - 0.5 * np.exp(-np.abs(GRID.x))))
    assert err <= 1e-12


def test_variance_gamma_t2_closed_form():
    # (1 + theta^2)^-2 is the density (1 + |x|) e^{-|x|} / 4
    field = gs_density(StableParams(2.0, 0.0, 1.0), GRID, 2.0)
    exact = (1 + np.abs(GRID.x)) * np.exp(-np.abs(GRID.x)) / 4
    assert np.max(np.abs(field.values - exact)) <= 1e-12


def test_cauchy_and_levy_stable_densities():
    cauchy = stable_density(StableParams(1.0, 0.0, 1.0), GRID, 1.0)
    assert np.max(np.abs(cauchy.values - stats.cauchy.pdf(GRID.x))) <= 1e-12
    levy = stable_density(StableParams(0.5, 1.0, 1.0), GRID, 1.0)
    exact = np.zeros(GRID.n_points)
    pos = GRID.x > 0
    exact[pos] = levy_fp_density(GRID.x[pos], 1.0)
    assert np.max(np.abs(levy.values - exact)) <= 1e-12


def test_gamma_density_field():
    g = GammaParams(1.0)
    field = gamma_density_field(g, GRID, 3.0)
    assert np.max(np.abs(field.values - gamma_density(g, GRID.x, 3.0))) <= 1e-12


def test_subordinator_negative_axis_small():
    field = gs_density(StableParams(0.5, 1.0, 1.0), GRID, 2.0)
    assert np.max(np.abs(field.values[GRID.x < -0.5])) <= 5e-9


def test_periodic_mode_mass():
    # h sum_j g_per(x_j) = sum_k phi(2 pi k / h): one up to the aliased terms
    field = gs_density(StableParams(1.5, -0.4), GRID, 2.0, periodic=True)
    assert field.mass() == pytest.approx(1.0, abs=1e-9)
    assert np.min(field.values) > -1e-12
    cusp = gs_density(StableParams(0.5, 1.0), GRID, 2.0, periodic=True)
    assert cusp.mass() == pytest.approx(1.0, abs=1e-4)


def test_quadrature_agrees_with_fft():
    field = gs_density(StableParams(0.5, 1.0, 1.0), GRID, 2.0)
    g = GammaParams(1.0)
    for j in (8253, 8397, 9626):
        val, err = quadrature_subordinate(levy_fp_density, g, GRID.x[j], 2.0)
        assert err <= 1e-9
        assert val == pytest.approx(field.values[j], abs=1e-10)
    assert quadrature_subordinate(levy_fp_density, g, 1.0, 2.0)[0] == pytest.approx(0.12421430332881407, rel=1e-10)


def test_quadrature_error_raised():
    with pytest.raises(QuadratureError):
        quadrature_subordinate(levy_fp_density, GammaParams(1.0), 1.0, 2.0, epsabs=1e-30)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError, match="Hermitian"):
        invert_charfn(lambda th: np.exp(-np.abs(th)) * np.exp(1j * np.abs(th)), Grid1D(-10, 10, 256))


def test_apply_multiplier_derivative():
    g = Grid1D(-20.0, 20.0, 1024)
    field = DensityField(g, np.exp(-g.x ** 2 / 2), 0.0, "closed_form")
    d = apply_multiplier(field, lambda th: -1j * th)
    np.testing.assert_allclose(d, -g.x * np.exp(-g.x ** 2 / 2), atol=1e-12)


@settings(deadline=None, max_examples=10)
@given(st.floats(1.2, 2.0), st.floats(-1, 1), st.floats(2.0, 4.0))
def test_periodic_samples_carry_aliased_charfn(a, b, t):
    # the DFT of exactly periodized samples is the aliased sum of phi; with
    # alpha t > 2 the directly truncated sum converges fast enough to compare
    p = StableParams(a, b)
    g = Grid1D(-40.0, 40.0, 2 ** 10)
    field = gs_density(p, g, t, periodic=True)
    theta = g.spectral().theta[1:20]
    period = 2 * g.spectral().nyquist
    m_max = 3000
    aliased = sum(gs_charfn(p, theta + m * period, t) for m in range(-m_max, m_max + 1))
    # omitted terms: |phi| ~ (c |theta|^alpha)^(-t), integrated over |m| > m_max
    c = p.feller.c
    tail = 2 * c ** -t * (m_max * period) ** (1 - a * t) / ((a * t - 1) * period)
    assert np.max(np.abs(forward(field.values, g)[1:20] - aliased)) <= 1.1 * tail + 1e-12


def test_density_csv():
    g = Grid1D(-1.0, 1.0, 8)
    buf = io.StringIO()
    DensityField(g, np.arange(8.0), 2.0, "closed_form").to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,density,t,provenance"
    assert lines[1] == "-1,0,2,closed_form"
    assert len(lines) == 9


def test_laplace_grid_mass_is_exact_riemann_sum():
    # h sum_j e^{-|x_j|}/2 = (h/2) coth(h/2): the O(h^2) excess comes from the kink at 0
    field = gs_density(StableParams(2.0, 0.0), GRID, 1.0)
    h = GRID.h
    assert field.mass() == pytest.approx((h / 2) / math.tanh(h / 2), abs=1e-14)


@pytest.mark.parametrize("t", [2.0, 3.0])
def test_cauchy_gamma_mass_with_tail(t):
    # mass on the domain plus the exact mass beyond |x| = 40 of the Cauchy mixture
    from scipy import integrate
    field = gs_density(StableParams(1.0, 0.0), GRID, t)
    tail = integrate.quad(lambda z: (1 - 2 / math.pi * math.atan(40 / z)) * gamma_density(GammaParams(1.0), z, t),
                          0, np.inf, limit=200)[0]
    assert field.mass() + tail == pytest.approx(1.0, abs=2.5e-6)


def test_plancherel():
    v = np.random.default_rng(0).normal(size=GRID.n_points)
    lhs = GRID.h * np.sum(v ** 2)
    rhs = np.sum(np.abs(forward(v, GRID)) ** 2) / (GRID.n_points * GRID.h)
    assert rhs == pytest.approx(lhs, rel=1e-10)


def test_refinement_changes_laplace_at_roundoff():
    for n in (2 ** 10, 2 ** 12):
        coarse = gs_density(StableParams(2.0), Grid1D(-40.0, 40.0, n), 1.0).values
        fine = gs_density(StableParams(2.0), Grid1D(-40.0, 40.0, 2 * n), 1.0).values[::2]
        assert np.max(np.abs(coarse - fine)) <= 1e-14


def test_gaussian_subordination_is_laplace_at_zero():
    gauss = lambda x, z: np.exp(-x ** 2 / (4 * z)) / np.sqrt(4 * np.pi * z)
    assert quadrature_subordinate(gauss, GammaParams(1.0), 0.0, 1.0)[0] == pytest.approx(0.5, abs=1e-9)


def test_first_passage_far_tail():
    # heavy x^(-3/2) tail: g(x, t) ~ t x^(-3/2) / sqrt(2 pi)
    v = quadrature_subordinate(levy_fp_density, GammaParams(1.0), 400.0, 2.0)[0]
    assert v == pytest.approx(2.0 / math.sqrt(2 * math.pi) * 400.0 ** -1.5, rel=2e-2)
