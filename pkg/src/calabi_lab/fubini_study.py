"""Radial computations for the rescaled Fubini-Study family on P^1.

``omega_lambda`` is the pull-back of the round metric under ``z -> lambda z``;
its potential relative to ``omega`` is

    phi_lambda = log(lambda^-2 + |z|^2) - log(1 + |z|^2).

All integrals are one-dimensional in ``r = |z|`` except the 2-D cross-check
:func:`chart_gradient_energy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DivergentBound, QuadratureNotConverged

QUAD_RTOL = 1e-8
ROUND_CURVATURE = 2.0


@dataclass(frozen=True)
class FSProbe:
    lam: float
    p: float
    substitution: Literal["tan", "none"] = "tan"
    nodes: int = 24
    r_cut: float = 1e4

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("lambda must be >= 1")
        if not (0 < self.p <= 2):
            raise ValueError("p must lie in (0, 2]")


def fs_potential(lam, r):
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    # near 0 keep lambda^-2 against r^2; far out phi ~ -(1 - lambda^-2) / r^2 needs the second form
    with np.errstate(divide="ignore"):
        near = np.log1p((lam * r) ** 2) - np.log1p(r**2) - 2 * np.log(lam)
        far = np.log1p(-(1 - lam**-2.0) / (1 + r * r))
    return np.where(r < 1, near, far)


def grad_density(lam, r):
    """``|d phi_lambda|^2_omega``."""
    a = np.asarray(lam, dtype=float) ** -2.0
    r2 = np.asarray(r, dtype=float) ** 2
    return r2 * (1 - a) ** 2 / (a + r2) ** 2


def lp_integrand(lam: float, p: float, r):
    """Radial integrand of ``int |d phi_lambda|^p omega`` (without the 2 pi)."""
    a = lam**-2.0
    r = np.asarray(r, dtype=float)
    return r ** (p + 1) * (1 - a) ** p / ((a + r * r) ** p * (1 + r * r) ** 2)


def bound_integrand(p: float, r):
    """The lambda-free majorant ``r^{1-p} / (1 + r^2)^2``."""
    r = np.asarray(r, dtype=float)
    return r ** (1 - p) / (1 + r * r) ** 2


def _r_breaks(scale: float) -> np.ndarray:
    """Panel edges in r: geometric grading around ``scale`` and around 1."""
    pts = {scale * 2.0**k for k in range(-20, 41)} | {2.0**k for k in range(-20, 21)}
    return np.array(sorted(pts))


def _panel_rule(edges: np.ndarray, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


def radial_nodes(scale: float, nodes: int, substitution: str = "tan", r_cut: float = 1e4):
    """Gauss-Legendre nodes and weights in r covering ``[r_min, inf)`` (tan)
    or ``[r_min, r_cut]``; returns ``(r, weights, r_min)``."""
    edges = _r_breaks(scale)
    r_min = float(edges[0])
    if substitution == "tan":
        theta_edges = np.concatenate([np.arctan(edges), [np.pi / 2]])
        # grade toward pi/2 as well; the far tail maps onto a short theta interval
        tail = np.pi / 2 - (np.pi / 2 - theta_edges[-2]) * 2.0 ** -np.arange(1, 25)
        theta_edges = np.concatenate([theta_edges[:-1], tail, [np.pi / 2]])
        th, w = _panel_rule(theta_edges, nodes)
        r = np.tan(th)
        return r, w / np.cos(th) ** 2, r_min
    if substitution == "none":
        edges = np.concatenate([edges[edges < r_cut], [r_cut]])
        r, w = _panel_rule(edges, nodes)
        return r, w, r_min
    raise ValueError(f"unknown substitution {substitution!r}")


def _converged(evaluate, nodes: int) -> float:
    coarse = evaluate(nodes)
    fine = evaluate(2 * nodes)
    if abs(fine - coarse) > QUAD_RTOL * abs(fine) and abs(fine - coarse) > 1e-300:
        raise QuadratureNotConverged(f"node doubling changed the value by {abs(fine - coarse):.3g}")
    return fine


def lp_gradient_norm(probe: FSProbe) -> float:
    """``int |d phi_lambda|^p omega = 2 pi int_0^inf lp_integrand dr``."""
    lam, p = float(probe.lam), float(probe.p)
    if lam == 1.0:
        return 0.0

    def evaluate(n):
        r, w, r_min = radial_nodes(1.0 / lam, n, probe.substitution, probe.r_cut)
        # below r_min the integrand is r^{p+1} (1-a)^p / a^p to relative O((lam r_min)^2)
        a = lam**-2.0
        head = r_min ** (p + 2) / (p + 2) * (1 - a) ** p / a**p
        return 2 * np.pi * (float(np.sum(w * lp_integrand(lam, p, r))) + head)

    return _converged(evaluate, probe.nodes)


def lp_upper_bound(p: float, nodes: int = 24) -> float:
    """``2 pi int_0^inf r^{1-p} / (1 + r^2)^2 dr``, finite exactly when p < 2."""
    if p >= 2:
        raise DivergentBound(f"r^(1-p)/(1+r^2)^2 is not integrable at 0 for p = {p}")

    def evaluate(n):
        r, w, r_min = radial_nodes(1.0, n)
        head = r_min ** (2 - p) / (2 - p)
        return 2 * np.pi * (float(np.sum(w * bound_integrand(p, r))) + head)

    return _converged(evaluate, nodes)


def chart_gradient_energy(lam: float, nodes: int = 20) -> float:
    """Independent 2-D check of ``int |d phi_lambda|^2 omega`` on the z-chart.

    Tensor Gauss-Legendre over the quadrant after ``x = tan(a)``,
    ``y = tan(b)`` (no radial cut), times four.  The area element is
    ``(1 + |z|^2)^-2 dx dy``, the one implicit in the radial formula.
    """
    r1, w1, r_min = radial_nodes(1.0 / lam, nodes)
    keep = r1 < 1e8
    # the integrand is smooth across the axes, so [0, r_min] is one more panel
    r0, w0 = _panel_rule(np.array([0.0, r_min]), nodes)
    r1, w1 = np.concatenate([r0, r1[keep]]), np.concatenate([w0, w1[keep]])
    X, Y = np.meshgrid(r1, r1, indexing="ij")
    R2 = X * X + Y * Y
    integrand = grad_density(lam, np.sqrt(R2)) / (1 + R2) ** 2
    return 4.0 * float(w1 @ integrand @ w1)


def metric_ratio_at_zero(lam: float, rtol: float = 1e-6) -> float:
    """``omega_lambda(0) / omega(0) = lambda^2``, cross-checked by a central second
    difference of the radial potentials at the origin."""
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    h = 1e-3 / lam
    # radial Laplacian at 0 is 2 f''(0); the factor cancels in the ratio
    d2 = lambda f: 2.0 * (f(h) - f(0.0)) / h**2
    scaled = d2(lambda r: math.log1p((lam * r) ** 2))
    ref = d2(lambda r: math.log1p(r * r))
    numeric = scaled / ref
    exact = lam * lam
    if abs(numeric - exact) > rtol * exact:
        raise ArithmeticError(f"metric ratio cross-check failed: {numeric} vs {exact}")
    return exact


def _d2(fn, t, h):
    return (fn(t + h) - 2 * fn(t) + fn(t - h)) / (h * h)


def radial_scalar_curvature(lam: float, r, h: float = 0.02):
    """Curvature of ``omega_lambda`` from its chart potential ``log(1 + lambda^2 |z|^2)``.

    Works in ``t = log r``, where the radial Laplacian is ``r^-2 d_tt / 2`` and
    ``S = -(log psi_tt)_tt / psi_tt`` for the potential ``psi``; both
    second derivatives are central differences with step ``h``.  Rescaling
    ``lambda`` is a translation in t, so the discretisation error does not
    depend on lambda at the pulled-back point.  Accuracy degrades for
    ``lambda r`` beyond ~30 where ``psi_tt`` is swamped by round-off.
    """
    t = np.log(np.asarray(r, dtype=float))
    loglam = math.log(lam)

    def psi(tt):
        return np.log1p(np.exp(2 * (tt + loglam)))

    def psi_tt(tt):
        return _d2(psi, tt, h)

    return -_d2(lambda tt: np.log(psi_tt(tt)), t, h) / psi_tt(t)


def default_sample_radii(lam: float) -> np.ndarray:
    return np.geomspace(1e-2, 10.0, 13) / lam


def fs_curvature_check(lam: float, sample_rs=None, h: float = 0.02) -> float:
    """``max |S(omega_lambda) - 2|`` over the sample radii."""
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    rs = default_sample_radii(lam) if sample_rs is None else np.asarray(sample_rs, dtype=float)
    return float(np.max(np.abs(radial_scalar_curvature(lam, rs, h) - ROUND_CURVATURE)))


SWEEP_COLUMNS = ("lambda", "p", "lp_norm", "upper_bound", "ratio", "curvature_dev")


def sweep_row(lam: float, p: float) -> dict:
    lp = lp_gradient_norm(FSProbe(lam, p))
    try:
        bound = lp_upper_bound(p)
    except DivergentBound:
        bound = math.inf
    return {
        "lambda": float(lam),
        "p": float(p),
        "lp_norm": lp,
        "upper_bound": bound,
        "ratio": metric_ratio_at_zero(lam),
        "curvature_dev": fs_curvature_check(lam),
    }
