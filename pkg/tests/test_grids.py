"""Discretization tests: quadrature, Laplacian, gradients."""

import numpy as np
import pytest
from scipy.integrate import quad

from coneflow.errors import ConfigError, MetricDegenerateError, ShapeError
from coneflow.grids import (
    VOLUME,
    Field,
    build_grid,
    dirichlet_energy,
    gradient_sq,
    integrate,
    laplacian_background,
)


def test_volume_against_chart_quadrature_oracle():
    # independent oracle: area = int 2/(1+r^2)^2 * 2 dx dy over the plane
    oracle, _ = quad(lambda r: 2.0 / (1.0 + r * r) ** 2 * 2.0 * 2.0 * np.pi * r, 0, np.inf)
    assert abs(oracle - VOLUME) < 1e-10
    g1 = build_grid("axisym1D", 256)
    assert abs(g1.weight * g1.size - oracle) < 1e-12 * oracle
    g2 = build_grid("full2D", 64, 128)
    assert abs(g2.weight * g2.size - oracle) < 1e-12 * oracle


@pytest.mark.parametrize("mode,nxi,nth", [("axisym1D", 4, None), ("full2D", 64, 4)])
def test_grid_size_floor(mode, nxi, nth):
    with pytest.raises(ConfigError):
        build_grid(mode, nxi, nth)


def test_field_shape_and_finiteness():
    g = build_grid("axisym1D", 32)
    with pytest.raises(ShapeError):
        Field(np.zeros(31), g)
    with pytest.raises(ShapeError):
        Field(np.full(32, np.nan), g)


def test_laplacian_annihilates_constants():
    for g in (build_grid("axisym1D", 64), build_grid("full2D", 32, 16)):
        out = laplacian_background(g.constant_field(3.7)).values
        assert np.max(np.abs(out)) == 0.0


def test_laplacian_first_harmonic_eigenvalue():
    # f = 2 xi - 1 is the axial first spherical harmonic; lap0 f = -f exactly
    # for this flux discretization because xi(1-xi) f' is quadratic.
    g = build_grid("axisym1D", 128)
    f = g.field(2.0 * g.xi - 1.0)
    out = laplacian_background(f).values
    assert np.max(np.abs(out + f.values)) < 1e-13


def test_laplacian_second_order_convergence():
    # symbolic reference for f = (2 xi - 1)^2:
    # lap0 f = (1/2) d/dxi( xi(1-xi) * 4(2xi-1) ) = 2(-(2xi-1)^2 + 2 xi(1-xi) * 2)
    errs = []
    for n in (64, 128, 256):
        g = build_grid("axisym1D", n)
        x = g.xi
        f = g.field((2 * x - 1) ** 2)
        exact = 2.0 * (-((2 * x - 1) ** 2) + 4.0 * x * (1 - x))
        errs.append(np.max(np.abs(laplacian_background(f).values - exact)))
    assert errs[0] / errs[1] > 3.2 and errs[1] / errs[2] > 3.2  # ~4x per halving


def test_laplacian_self_adjoint():
    rng = np.random.default_rng(7)
    for g in (build_grid("axisym1D", 96), build_grid("full2D", 24, 16)):
        f = g.field(rng.normal(size=g.size))
        h = g.field(rng.normal(size=g.size))
        lf = laplacian_background(f).values
        lh = laplacian_background(h).values
        lhs = np.sum(lf * h.values) * g.weight
        rhs = np.sum(f.values * lh) * g.weight
        scale = np.linalg.norm(f.values) * np.linalg.norm(h.values) * g.weight
        assert abs(lhs - rhs) <= 1e-10 * scale


def test_divergence_theorem():
    g = build_grid("axisym1D", 256)
    f = g.field(np.sin(3.0 * g.xi) * (1 - g.xi) * g.xi)
    total = integrate(g.field(1.0 + laplacian_background(f).values))
    assert abs(total - VOLUME) < 1e-10


def test_quadrature_exactness_linear():
    g = build_grid("axisym1D", 64)
    # degree <= 1 polynomials in xi integrate exactly against dV0
    assert abs(integrate(g.field(np.ones(g.size))) - VOLUME) < 1e-12
    assert abs(integrate(g.field(2 * g.xi - 1))) < 1e-12 * VOLUME


def test_integrate_class_preservation():
    g = build_grid("axisym1D", 128)
    phi = g.field(0.2 * np.sin(2 * np.pi * g.xi))
    dens = g.field(g.rho0 * (1.0 + laplacian_background(phi).values))
    assert abs(integrate(g.constant_field(1.0), dens) - VOLUME) < 1e-10


def _smooth_test_field(g, seed=0):
    rng = np.random.default_rng(seed)
    xi = g.xi_nodes
    th = g.theta_nodes
    vals = sum(
        rng.normal() * np.sin((m + 1) * np.pi * xi) * np.cos(m * th)
        for m in range(3)
    )
    return g.field(0.3 * vals)


@pytest.mark.parametrize("mode,nxi,nth", [("axisym1D", 256, None), ("full2D", 64, 64)])
def test_gradient_integration_by_parts(mode, nxi, nth):
    g = build_grid(mode, nxi, nth)
    f = _smooth_test_field(g, seed=3)
    dens = g.field(g.rho0 * 1.3)
    lhs = integrate(gradient_sq(f, dens), dens)
    rhs = -integrate(
        g.field(f.values * laplacian_background(f).values / 1.3), dens
    )
    assert abs(lhs - rhs) <= 2e-3 * max(abs(rhs), 1e-12)


def test_gradient_sq_basics():
    g = build_grid("axisym1D", 64)
    assert np.max(gradient_sq(g.constant_field(2.0)).values) == 0.0
    f = _smooth_test_field(g)
    dens1 = g.field(g.rho0.copy())
    dens2 = g.field(2.0 * g.rho0)
    ratio = gradient_sq(f, dens2).values / np.maximum(gradient_sq(f, dens1).values, 1e-300)
    assert np.allclose(ratio, 0.5, atol=1e-12)
    with pytest.raises(MetricDegenerateError):
        gradient_sq(f, g.field(-np.ones(g.size)))


def test_dirichlet_energy_matches_gradient_quadrature():
    g = build_grid("axisym1D", 512)
    f = _smooth_test_field(g, seed=5)
    e_exact = dirichlet_energy(f)
    e_point = integrate(gradient_sq(f, g.field(g.rho0.copy())), g.field(g.rho0.copy()))
    assert e_exact > 0
    assert abs(e_exact - e_point) < 2e-4 * e_exact


def test_spectral_theta_derivative_consistency():
    # power-of-two n_theta uses FFT; compare with an odd grid's centered
    # differences on the same smooth function
    g_fft = build_grid("full2D", 32, 64)
    f = g_fft.field(np.cos(2.0 * g_fft.theta_nodes) * np.sin(np.pi * g_fft.xi_nodes))
    gs = gradient_sq(f).values.reshape(32, 64)
    # analytic theta-part check on one ring: d/dtheta cos(2 th) = -2 sin(2 th)
    xi = g_fft.xi[16]
    ring = gs[16]
    s = np.sin(np.pi * xi)
    fxi = np.pi * np.cos(np.pi * xi) * np.cos(2.0 * g_fft.theta)
    expected = xi * (1 - xi) * fxi**2 / 2.0 + (
        (2.0 * np.sin(2.0 * g_fft.theta) * s) ** 2 / (8.0 * xi * (1 - xi))
    )
    assert np.max(np.abs(ring - expected)) < 5e-3 * np.max(np.abs(expected))
