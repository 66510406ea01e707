"""Toric (symplectic-coordinate) backend for S^1-invariant metrics on P^1.

The moment interval is ``[0, L]`` with cell-centred nodes ``x_i = (i + 1/2) h``.
A metric is a symplectic potential ``u = u0 + f`` with the Guillemin part

    u0(x) = (x log x + (L - x) log(L - x)) / 2,

whose boundary log-singularity is differentiated in closed form.  Writing
``w = 1 / u''`` the scalar curvature is Abreu's

    S = -c_A w'',   c_A = 1/2.

Calibration: for u0, ``w0 = 2 x (L - x) / L`` so ``w0'' = -4 / L`` and
``S = 2 / L``; at ``L = 1`` this is the round metric of volume ``2 pi`` with
``Ric = 2 omega``, matching the torus convention ``S = Lambda_omega Ric``.

Every potential in the Guillemin class has ``w(0) = w(L) = 0`` and
``w'(0) = -w'(L) = 2``; the boundary cells use those facts in a cubic
Hermite closure so ``S`` stays second order up to the ends.

The Kähler potential in the log-coordinate ``rho = u'(x)`` is twice the
Legendre dual ``G(rho) = x rho - u(x)``; differences against the Guillemin
reference are taken at equal ``rho``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from ..errors import NotConvex
from .types import GeometryConfig, MetricDensity, MetricSample, ToricPotential

ABREU_CONSTANT = 0.5
BOUNDARY_SLOPE = 2.0


def nodes(geom: GeometryConfig) -> np.ndarray:
    h = geom.spacing
    return (np.arange(geom.grid_n) + 0.5) * h


def guillemin(x, L):
    return 0.5 * (x * np.log(x) + (L - x) * np.log(L - x))


def guillemin_d1(x, L):
    return 0.5 * (np.log(x) - np.log(L - x))


def guillemin_d2(x, L):
    return 0.5 * (1.0 / x + 1.0 / (L - x))


def guillemin_profile(x, L):
    """``1 / u0''``."""
    return 2.0 * x * (L - x) / L


@lru_cache(maxsize=32)
def operators(n: int, L: float):
    """Sparse difference operators on the cell-centred grid.

    Returns ``(D1, D2, H, b)``: first and second derivatives of the smooth
    part (second-order one-sided stencils in the end cells), and the affine
    second-derivative map ``w -> H w + b`` for the profile ``w = 1/u''`` with
    the Hermite boundary closure.
    """
    h = L / n
    D1 = sp.lil_matrix((n, n))
    D2 = sp.lil_matrix((n, n))
    H = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        D1[i, i - 1], D1[i, i + 1] = -0.5 / h, 0.5 / h
        D2[i, i - 1], D2[i, i], D2[i, i + 1] = 1 / h**2, -2 / h**2, 1 / h**2
        H[i, i - 1], H[i, i], H[i, i + 1] = 1 / h**2, -2 / h**2, 1 / h**2
    D1[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2 * h)
    D1[n - 1, n - 3:] = np.array([1.0, -4.0, 3.0]) / (2 * h)
    D2[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h**2
    D2[n - 1, n - 4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2
    # cubic through w(0)=0, w'(0)=c, w(h/2), w(3h/2); its w'' at h/2 ignores w(h/2)
    H[0, 1] = 8.0 / (9.0 * h**2)
    H[n - 1, n - 2] = 8.0 / (9.0 * h**2)
    b = np.zeros(n)
    b[0] = b[-1] = -(8.0 / 9.0) * 1.5 * BOUNDARY_SLOPE / h
    D1, D2, H = D1.tocsr(), D2.tocsr(), H.tocsr()
    b.setflags(write=False)
    return D1, D2, H, b


def _ops(geom: GeometryConfig):
    return operators(int(geom.grid_n), float(geom.polytope_length))


def second_derivative(tp: ToricPotential) -> np.ndarray:
    """``u'' = u0'' + f''`` on the interior nodes."""
    geom = tp.geometry
    _, D2, _, _ = _ops(geom)
    return guillemin_d2(nodes(geom), geom.polytope_length) + D2 @ tp.f


def profile(tp: ToricPotential) -> np.ndarray:
    """``w = 1 / u''``; raises NotConvex when ``u'' <= 0`` at a node."""
    upp = second_derivative(tp)
    m = float(np.min(upp))
    if not np.isfinite(m) or m <= 0.0:
        raise NotConvex(m)
    return 1.0 / upp


def profile_second_derivative(w: np.ndarray, geom: GeometryConfig) -> np.ndarray:
    _, _, H, b = _ops(geom)
    return H @ w + b


def abreu_scalar_curvature(tp: ToricPotential) -> np.ndarray:
    w = profile(tp)
    return -ABREU_CONSTANT * profile_second_derivative(w, tp.geometry)


def _legendre_data(tp: ToricPotential, w: np.ndarray):
    geom = tp.geometry
    L = geom.polytope_length
    x = nodes(geom)
    D1, _, _, _ = _ops(geom)
    u = guillemin(x, L) + tp.f
    rho = guillemin_d1(x, L) + D1 @ tp.f
    # reference point with the same log-coordinate rho
    x0 = L * expit(2 * rho)
    y0 = L * expit(-2 * rho)
    g = x * rho - u
    g0 = x0 * rho - 0.5 * (x0 * np.log(x0) + y0 * np.log(y0))
    potential = 2.0 * (g - g0)
    u_ratio = w / (2.0 * x0 * y0 / L)
    return potential, u_ratio


def kahler_potential(tp: ToricPotential) -> np.ndarray:
    """Kähler potential relative to the Guillemin metric, at the nodes."""
    return _legendre_data(tp, profile(tp))[0]


def density(tp: ToricPotential) -> MetricDensity:
    """Pointwise ratio omega_phi / omega at corresponding complex points."""
    return MetricDensity(_legendre_data(tp, profile(tp))[1])


def sample(tp: ToricPotential) -> MetricSample:
    geom = tp.geometry
    w = profile(tp)
    s = -ABREU_CONSTANT * profile_second_derivative(w, geom)
    potential, u_ratio = _legendre_data(tp, w)
    weights = 2 * np.pi * geom.spacing / u_ratio
    return MetricSample(u=u_ratio, scalar=s, potential=potential, weights=weights)


def implicit_operator(tp: ToricPotential, w: np.ndarray | None = None):
    """Frozen linearisation ``L`` of the toric flow (``df/dt ~ -L f``).

    With ``df/dt = -(S - S_hat)/2`` and ``dS = H diag(w^2) D2 df / 2`` this is
    ``H diag(w^2) D2 / 4``, banded.
    """
    if w is None:
        w = profile(tp)
    _, D2, H, _ = _ops(tp.geometry)
    return 0.25 * (H @ sp.diags(w**2) @ D2)


def toric_potential(geom: GeometryConfig, fn=None) -> ToricPotential:
    """Build a ToricPotential from a callable smooth part ``fn(x)``."""
    x = nodes(geom)
    f = np.zeros_like(x) if fn is None else np.asarray(fn(x), dtype=float) * np.ones_like(x)
    return ToricPotential(f, geom)
