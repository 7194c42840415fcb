"""Closed-form background geometry of the sphere and the divisor data.

Everything here is pointwise in the stereographic chart z (second chart
w = 1/z is implicit through the area coordinate xi).  The background Kahler
form is fixed once and for all as

    omega0 = rho0 * i dz ^ dzbar,     rho0(z) = 2 / (1 + |z|^2)^2,

which has Ric(omega0) = omega0, total area 4*pi, and hence vanishing Ricci
potential.  A divisor is a list of distinct chart points (possibly including
the point at infinity) of degree d; it carries lam = d/2 and a Hermitian
scale c chosen so that sup |s|_h^2 = 1/4, comfortably below the 1/2 ceiling
the flow equations assume.

The regularization objects -- the smooth divisor weight log(eps^2 + |s|^2),
the positive form theta_eps, the mollified cone potential chi_gamma and the
reference metrics built from them -- are evaluated here as fields on a grid.
Second derivatives use the grid's own discrete Laplacian so that every
downstream identity (class preservation, stationarity) holds at the discrete
level, not just in the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConfigError,
    KTooLargeError,
    ParameterError,
    SingularEvaluationError,
)
from .grids import Field, SphereGrid, VOLUME

INF = complex(math.inf, 0.0)

DEFAULT_SUP_S2 = 0.25   # target sup |s|_h^2 under automatic scaling
_K_FLOOR_FACTOR = 0.1   # reference density must stay above this * min(rho0)


@dataclass(frozen=True)
class GeometrySetup:
    """Fixed background data: volume, Ricci potential (identically 0), k."""

    k: float
    volume: float = VOLUME
    ricci_potential: float = 0.0  # F0; the chosen rho0 makes it vanish


def background_density(grid: SphereGrid) -> Field:
    """Round background density rho0 = 2/(1+|z|^2)^2 = 2(1-xi)^2 per node."""
    return Field(grid.rho0.copy(), grid)


class DivisorData:
    """Distinct points of a smooth divisor plus the Hermitian scale c.

    |s|_h^2(z) = c * prod |z - p_i|^2 / (1+|z|^2)^(2 lam), with points at
    infinity contributing no numerator factor; lam = (number of points)/2.
    """

    def __init__(self, points, c: float | None = None):
        pts = []
        for p in points:
            if p is INF or (isinstance(p, complex) and math.isinf(abs(p))) or p == math.inf:
                pts.append(INF)
            else:
                pts.append(complex(p))
        if not pts:
            raise ConfigError("divisor needs at least one point")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i] == pts[j]:
                    raise ConfigError(f"divisor points must be distinct, got {pts[i]} twice")
        self.points: tuple[complex, ...] = tuple(pts)
        self.degree = len(pts)
        self.lam = self.degree / 2.0
        self.c = float(c) if c is not None else self._auto_scale()

    @property
    def finite_points(self) -> tuple[complex, ...]:
        return tuple(p for p in self.points if p is not INF)

    @property
    def n_infinity(self) -> int:
        return sum(1 for p in self.points if p is INF)

    def is_axisymmetric(self) -> bool:
        return all(p is INF or p == 0 for p in self.points)

    def _log_modulus_sq_unscaled(self, z: np.ndarray, one_minus_xi: np.ndarray) -> np.ndarray:
        # log prod|z-p|^2 - 2 lam log(1+|z|^2); 1/(1+|z|^2) = 1-xi supplied
        # separately so the pole cells keep full precision.
        out = 2.0 * self.lam * np.log(one_minus_xi)
        for p in self.finite_points:
            out = out + np.log(np.abs(z - p) ** 2)
        return out

    def _auto_scale(self) -> float:
        # Dense (xi, theta) sampling; the 2x margin to the 1/2 ceiling makes
        # sampling resolution uncritical.
        n_xi, n_th = 4096, (256 if not self.is_axisymmetric() else 1)
        xi = (np.arange(n_xi) + 0.5) / n_xi
        th = (np.arange(n_th) + 0.5) * (2.0 * np.pi / n_th)
        r = np.sqrt(xi / (1.0 - xi))
        z = r[:, None] * np.exp(1j * th)[None, :]
        omxi = np.repeat((1.0 - xi)[:, None], n_th, axis=1)
        sup = np.max(self._log_modulus_sq_unscaled(z.ravel(), omxi.ravel()))
        return DEFAULT_SUP_S2 / math.exp(sup)

    def log_modulus_sq(self, grid: SphereGrid) -> Field:
        """log |s|_h^2 at the grid nodes (finite: nodes are off the divisor)."""
        if grid.mode == "axisym1D" and not self.is_axisymmetric():
            raise ConfigError("axisym1D grid supports only divisors contained in {0, inf}")
        z = grid.z_nodes()
        vals = math.log(self.c) + self._log_modulus_sq_unscaled(z, 1.0 - grid.xi_nodes)
        if not np.all(np.isfinite(vals)):
            raise SingularEvaluationError("a grid node coincides with a divisor point")
        return Field(vals, grid)

    def modulus_sq(self, grid: SphereGrid) -> Field:
        return Field(np.exp(self.log_modulus_sq(grid).values), grid)

    def __repr__(self):
        pts = ", ".join("inf" if p is INF else f"{p:g}" for p in self.points)
        return f"DivisorData([{pts}], c={self.c:g}, lam={self.lam:g})"


def divisor_log_weight(grid: SphereGrid, divisor: DivisorData, eps: float) -> Field:
    """Samples of the smoothed divisor weight log(eps^2 + |s|_h^2)."""
    if eps < 0.0:
        raise ParameterError("eps must be nonnegative")
    log_s2 = divisor.log_modulus_sq(grid).values
    if eps == 0.0:
        return Field(log_s2, grid)
    # log(eps^2 + e^x) computed stably for very negative x
    return Field(np.logaddexp(2.0 * math.log(eps), log_s2), grid)


# ---------------------------------------------------------------------------
# Mollified cone potential chi_gamma
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _chi_integrand(r: np.ndarray, gamma: float, eps: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    e2 = eps * eps
    out = np.empty_like(r)
    tiny = r < 1e-12
    # analytic limit of ((eps^2+r)^g - eps^(2g))/r as r -> 0 removes the
    # removable singularity
    out[tiny] = gamma * e2 ** (gamma - 1.0)
    rr = r[~tiny]
    out[~tiny] = ((e2 + rr) ** gamma - e2**gamma) / rr
    return out


def _check_gamma(gamma: float):
    if not (0.0 < gamma <= 1.0):
        raise ParameterError(f"gamma = {gamma} outside (0, 1]")


def chi_gamma(y, gamma: float, eps: float):
    """Mollified cone potential: (1/gamma) * integral_0^y ((eps^2+r)^gamma - eps^(2 gamma))/r dr.

    Closed form y^gamma / gamma^2 at eps = 0; adaptive/composite quadrature
    otherwise.  Nonnegative and nondecreasing in y.  Accepts scalars or
    arrays.
    """
    _check_gamma(gamma)
    scalar = np.isscalar(y)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(ys < 0.0):
        raise ParameterError("y must be nonnegative")
    if eps == 0.0:
        out = ys**gamma / gamma**2
        return float(out[0]) if scalar else out
    out = _chi_many(ys, gamma, eps)
    return float(out[0]) if scalar else out


def _chi_many(ys: np.ndarray, gamma: float, eps: float) -> np.ndarray:
    """Cumulative composite quadrature of the chi integrand at many y values."""
    uniq, inverse = np.unique(ys, return_inverse=True)
    pos = uniq[uniq > 0.0]
    if pos.size == 0:
        return np.zeros_like(ys)
    # refine geometrically around the r ~ eps^2 transition of the integrand
    e2 = eps * eps
    extra = e2 * np.geomspace(2.0**-6, 2.0**12, 37)
    breaks = np.unique(np.concatenate([[0.0], pos, extra[extra < pos[-1]]]))
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    # vectorized 24-node Gauss-Legendre on every segment
    r = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    seg = half * (_chi_integrand(r.ravel(), gamma, eps)
                  .reshape(r.shape) @ _GL_WEIGHTS)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    vals_at_pos = cum[np.searchsorted(breaks, pos)]
    lookup = dict(zip(pos.tolist(), vals_at_pos.tolist()))
    res_uniq = np.array([lookup.get(u, 0.0) for u in uniq])
    return (res_uniq / gamma)[inverse].reshape(ys.shape)


def chi_gamma_prime(y, gamma: float, eps: float):
    """d chi_gamma / dy = ((eps^2+y)^gamma - eps^(2 gamma)) / (gamma y)."""
    _check_gamma(gamma)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    e2 = eps * eps
    out = np.empty_like(ys)
    tiny = ys < 1e-12
    out[tiny] = e2 ** (gamma - 1.0)
    out[~tiny] = ((e2 + ys[~tiny]) ** gamma - e2**gamma) / (gamma * ys[~tiny])
    return float(out[0]) if np.isscalar(y) else out


def chi_gamma_quadrature(y: float, gamma: float, eps: float) -> float:
    """Reference adaptive-quadrature evaluation of chi_gamma (single y)."""
    _check_gamma(gamma)
    if y == 0.0:
        return 0.0
    e2 = eps * eps
    pts = [p for p in (e2, 4 * e2, 16 * e2) if 0.0 < p < y]
    val, _ = quad(lambda r: float(_chi_integrand(np.array([r]), gamma, eps)[0]),
                  0.0, y, points=pts or None, limit=200, epsabs=1e-14, epsrel=1e-13)
    return val / gamma


# ---------------------------------------------------------------------------
# Regularized reference forms
# ---------------------------------------------------------------------------


def theta_eps_density(grid: SphereGrid, divisor: DivisorData, eps: float) -> Field:
    """Density of theta_eps = lam*omega0 + i ddbar log(eps^2+|s|^2).

    The mixed derivative is taken with the grid's discrete Laplacian so the
    cohomology-class quadrature lam*V holds to round-off.
    """
    if eps <= 0.0:
        raise SingularEvaluationError("theta_eps requires eps > 0 (singular form at eps = 0)")
    w = divisor_log_weight(grid, divisor, eps)
    dens = divisor.lam * grid.rho0 + grid.rho0 * (grid.lap @ w.values)
    return Field(dens, grid)


def regularized_reference_density(grid: SphereGrid, divisor: DivisorData,
                                  gamma: float, eps: float, k: float) -> Field:
    """Density of the smooth reference metric omega0 + k * i ddbar chi_gamma."""
    if eps <= 0.0:
        raise SingularEvaluationError("regularized reference requires eps > 0")
    _check_gamma(gamma)
    y = divisor.modulus_sq(grid).values
    chi = chi_gamma(y, gamma, eps)
    dens = grid.rho0 * (1.0 + k * (grid.lap @ chi))
    floor = _K_FLOOR_FACTOR * np.min(grid.rho0)
    if np.min(dens) < floor:
        raise KTooLargeError(
            f"k = {k:g} gives min reference density {np.min(dens):.3e} < {floor:.3e}"
        )
    return Field(dens, grid)


def donaldson_cone_density(grid: SphereGrid, divisor: DivisorData,
                           gamma: float, k: float) -> Field:
    """Density of the reference cone metric omega0 + (k/gamma^2) i ddbar |s|^(2 gamma).

    Diagnostic only; the grid keeps nodes off the divisor, where the form is
    smooth.
    """
    _check_gamma(gamma)
    y = divisor.modulus_sq(grid).values
    if np.any(y <= 0.0):
        raise SingularEvaluationError("evaluation at a divisor node")
    dens = grid.rho0 * (1.0 + (k / gamma**2) * (grid.lap @ (y**gamma)))
    return Field(dens, grid)


def pick_k(grid: SphereGrid, divisor: DivisorData, gamma: float, eps: float,
           k0: float = 1.0) -> float:
    """Halve k from k0 until the reference density clears the positivity floor."""
    k = float(k0)
    for _ in range(60):
        try:
            regularized_reference_density(grid, divisor, gamma, eps, k)
            return k
        except KTooLargeError:
            k *= 0.5
    raise KTooLargeError("no admissible k found down to k0 * 2^-60")
