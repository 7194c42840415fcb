"""Structured grids on the 2-sphere and the discrete operators living on them.

The sphere is parametrized by the area coordinate of the stereographic chart,

    xi = |z|^2 / (1 + |z|^2)  in (0, 1),      theta = arg z,

in which the round background volume element is uniform: dV0 = 2 dxi dtheta.
Cell-centered midpoint quadrature is therefore exact for functions linear in
xi, and the poles xi = 0, 1 stay off the grid.

Two modes are supported:

  * ``axisym1D`` -- n_xi cells in xi, fields depend on xi only;
  * ``full2D``   -- n_xi x n_theta cells, theta periodic, nodes stored
    row-major (xi index slow, theta index fast).

The background Laplacian (trace of i*ddbar against the round form, i.e. half
the round-sphere Laplace-Beltrami operator) is assembled once per grid in
conservative flux form

    lap f = 1/2 d/dxi( xi (1-xi) df/dxi )  +  f_hh / (8 xi (1-xi)),

with h = theta.  The degenerate coefficient xi(1-xi) vanishes at the pole
faces, which is exactly the mode-0 regularity closure: no boundary rows are
special-cased.  In this form the operator annihilates constants exactly, is
self-adjoint for the uniform quadrature weights, and obeys the discrete
divergence theorem, which the volume-preservation invariants rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, MetricDegenerateError, ShapeError

VOLUME = 4.0 * np.pi

MIN_NXI = 16
MIN_NTHETA = 8


@dataclass(frozen=True)
class SphereGrid:
    """Cell-centered grid in (xi, theta) with its quadrature and Laplacian."""

    mode: str
    n_xi: int
    n_theta: int
    xi: np.ndarray           # cell centers, shape (n_xi,)
    theta: np.ndarray | None  # cell centers, shape (n_theta,) or None (axisym)
    weight: float            # uniform quadrature weight per node, sums to 4*pi
    rho0: np.ndarray         # round background density 2(1-xi)^2 per node
    lap: sp.csr_matrix = field(repr=False)  # background Laplacian, symmetric
    face_coeff: np.ndarray = field(repr=False)  # xi(1-xi) at interior faces

    @property
    def size(self) -> int:
        return self.n_xi * self.n_theta

    @property
    def xi_nodes(self) -> np.ndarray:
        """xi of every node in storage order."""
        if self.mode == "axisym1D":
            return self.xi
        return np.repeat(self.xi, self.n_theta)

    @property
    def theta_nodes(self) -> np.ndarray:
        if self.mode == "axisym1D":
            return np.zeros(self.n_xi)
        return np.tile(self.theta, self.n_xi)

    def z_nodes(self) -> np.ndarray:
        """Chart points z = r e^{i theta}, r = sqrt(xi/(1-xi)), per node."""
        r = np.sqrt(self.xi_nodes / (1.0 - self.xi_nodes))
        return r * np.exp(1j * self.theta_nodes)

    def field(self, values) -> "Field":
        return Field(np.asarray(values, dtype=float), self)

    def constant_field(self, value: float) -> "Field":
        return Field(np.full(self.size, float(value)), self)


@dataclass
class Field:
    """Samples of a scalar function at the grid nodes."""

    values: np.ndarray
    grid: SphereGrid
    chart: str = "xi-theta"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.shape != (self.grid.size,):
            raise ShapeError(
                f"field has {self.values.size} samples, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("field contains non-finite samples")

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid, self.chart)


def build_grid(mode: str, n_xi: int, n_theta: int | None = None) -> SphereGrid:
    """Build a sphere grid; deterministic in its arguments.

    axisym1D ignores n_theta; full2D requires n_xi >= 16 and n_theta >= 8.
    """
    if mode not in ("axisym1D", "full2D"):
        raise ConfigError(f"unknown grid mode {mode!r}")
    if n_xi < MIN_NXI:
        raise ConfigError(f"n_xi = {n_xi} below minimum {MIN_NXI}")
    if mode == "axisym1D":
        n_theta = 1
    else:
        if n_theta is None or n_theta < MIN_NTHETA:
            raise ConfigError(f"n_theta = {n_theta} below minimum {MIN_NTHETA} for full2D")

    dxi = 1.0 / n_xi
    xi = (np.arange(n_xi) + 0.5) * dxi
    if mode == "axisym1D":
        theta = None
        weight = VOLUME * dxi  # integral f dV0 = 4*pi * sum f_i dxi
    else:
        dtheta = 2.0 * np.pi / n_theta
        theta = (np.arange(n_theta) + 0.5) * dtheta
        weight = 2.0 * dxi * dtheta

    rho0_1d = 2.0 * (1.0 - xi) ** 2
    if mode == "axisym1D":
        rho0 = rho0_1d
    else:
        rho0 = np.repeat(rho0_1d, n_theta)

    lap = _assemble_laplacian(mode, n_xi, 1 if mode == "axisym1D" else n_theta, xi)
    faces = np.arange(1, n_xi) * dxi
    face_coeff = faces * (1.0 - faces)
    return SphereGrid(mode, n_xi, (1 if mode == "axisym1D" else n_theta),
                      xi, theta, weight, rho0, lap, face_coeff)


def _assemble_laplacian(mode, n_xi, n_theta, xi) -> sp.csr_matrix:
    dxi = 1.0 / n_xi
    faces = np.arange(n_xi + 1) * dxi          # xi of cell faces, 0 .. 1
    a = faces * (1.0 - faces)                  # degenerate coefficient, 0 at poles

    # radial part: (1/2) [ a_{i+1/2}(f_{i+1}-f_i) - a_{i-1/2}(f_i-f_{i-1}) ] / dxi^2;
    # diagonal assembled from the same floats as the couplings so constants
    # are annihilated exactly, not just to round-off
    lo = 0.5 * a[1:-1] / dxi**2                # coupling between cells i and i+1
    main = -(np.concatenate([[0.0], lo]) + np.concatenate([lo, [0.0]]))
    radial = sp.diags([lo, main, lo], offsets=[-1, 0, 1], format="csr")

    if mode == "axisym1D":
        return radial.tocsr()

    dtheta = 2.0 * np.pi / n_theta
    # periodic second difference in theta
    ang = sp.diags(
        [np.ones(n_theta - 1), -2.0 * np.ones(n_theta), np.ones(n_theta - 1)],
        offsets=[-1, 0, 1], format="lil",
    )
    ang[0, -1] = 1.0
    ang[-1, 0] = 1.0
    ang = ang.tocsr() / dtheta**2
    coeff = sp.diags(1.0 / (8.0 * xi * (1.0 - xi)))
    eye_t = sp.identity(n_theta, format="csr")
    lap2d = sp.kron(radial, eye_t, format="csr") + sp.kron(coeff, ang, format="csr")
    return lap2d.tocsr()


def laplacian_background(f: Field) -> Field:
    """Apply the background Laplacian lap0 = tr_{omega0} i ddbar."""
    return Field(f.grid.lap @ f.values, f.grid)


def _d_dxi(grid: SphereGrid, vals2d: np.ndarray) -> np.ndarray:
    """Second-order xi-derivative on cell centers; one-sided at the pole cells."""
    dxi = 1.0 / grid.n_xi
    out = np.empty_like(vals2d)
    out[1:-1] = (vals2d[2:] - vals2d[:-2]) / (2.0 * dxi)
    out[0] = (-3.0 * vals2d[0] + 4.0 * vals2d[1] - vals2d[2]) / (2.0 * dxi)
    out[-1] = (3.0 * vals2d[-1] - 4.0 * vals2d[-2] + vals2d[-3]) / (2.0 * dxi)
    return out


def _d_dtheta(grid: SphereGrid, vals2d: np.ndarray) -> np.ndarray:
    """Periodic theta-derivative; spectral when n_theta is a power of two."""
    n = grid.n_theta
    if n & (n - 1) == 0:  # power of two: differentiate by FFT
        k = np.fft.rfftfreq(n, d=1.0 / n) * 1j
        return np.fft.irfft(np.fft.rfft(vals2d, axis=1) * k, n=n, axis=1)
    dtheta = 2.0 * np.pi / n
    return (np.roll(vals2d, -1, axis=1) - np.roll(vals2d, 1, axis=1)) / (2.0 * dtheta)


def gradient_sq(f: Field, metric_density: Field | None = None) -> Field:
    """Pointwise squared gradient |grad f|^2 measured in the given metric.

    In the (xi, theta) chart,

        |grad f|^2_{omega0} = xi(1-xi) f_xi^2 / 2 + f_theta^2 / (8 xi (1-xi)),

    and a conformal density rho scales it by rho0/rho.
    """
    grid = f.grid
    if metric_density is not None:
        if metric_density.grid is not grid:
            raise ShapeError("metric density lives on a different grid")
        if np.any(metric_density.values <= 0.0):
            raise MetricDegenerateError("metric density is nonpositive at a node")
    xi = grid.xi
    if grid.mode == "axisym1D":
        fxi = _d_dxi(grid, f.values)
        g0 = xi * (1.0 - xi) * fxi**2 / 2.0
    else:
        v = f.values.reshape(grid.n_xi, grid.n_theta)
        fxi = _d_dxi(grid, v)
        fth = _d_dtheta(grid, v)
        g0 = (xi * (1.0 - xi))[:, None] * fxi**2 / 2.0
        g0 = g0 + fth**2 / (8.0 * xi * (1.0 - xi))[:, None]
        g0 = g0.ravel()
    if metric_density is not None:
        g0 = g0 * (grid.rho0 / metric_density.values)
    return Field(g0, grid)


def integrate(f: Field, metric_density: Field | None = None) -> float:
    """Integral of f against the metric volume form (background by default)."""
    grid = f.grid
    if metric_density is None:
        return float(np.sum(f.values) * grid.weight)
    if metric_density.grid is not grid:
        raise ShapeError("metric density lives on a different grid")
    return float(np.sum(f.values * metric_density.values / grid.rho0) * grid.weight)


def mean_background(f: Field) -> float:
    """(1/V) integral of f against dV0."""
    return integrate(f) / VOLUME


def dirichlet_energy(f: Field, g: Field | None = None) -> float:
    """Exact discrete Dirichlet pairing -<f, lap0 g> under the dV0 quadrature.

    In complex dimension one the Dirichlet energy is conformally invariant, so
    this equals the integral of |grad f . grad g| against *any* metric on the
    grid; no density argument is needed.
    """
    if g is None:
        g = f
    if g.grid is not f.grid:
        raise ShapeError("fields live on different grids")
    return float(-np.dot(f.values, f.grid.lap @ g.values) * f.grid.weight)
