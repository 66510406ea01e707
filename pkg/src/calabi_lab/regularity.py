"""Local energies for epsilon-regularity and Lelong-number estimates on the torus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import j1

from .errors import BallTooLarge, RadiiTooSmall
from .geometry import PotentialField, grid
from .geometry import torus

# c_1 = 1/pi gives log|z| Lelong number 1: with Delta = (d_xx + d_yy)/2,
# Delta log|z| = pi * delta_0
LELONG_C1 = 1.0 / math.pi
MIN_RADIUS_CELLS = 4


@dataclass(frozen=True)
class ProbeConfig:
    centers: Sequence[tuple[float, float]]
    radii: Sequence[float]
    epsilon: float = 1.0
    lelong_c: float = LELONG_C1
    mollify_sigma: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) >= 0):
            raise ValueError("radii must be positive and strictly decreasing")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class ProbeRow:
    x: float
    y: float
    r: float
    local_energy: float
    sup_half_ball: float
    hypothesis_met: bool
    # sup_{B_{r/2}} e < 4 r^{-2n} / eps * int_{B_r} e
    sup_bound_met: bool
    # 4 r^{-2n} / eps * int_{B_r} e < 4 r^{-2}
    final_bound_met: bool

    @property
    def conclusion_met(self) -> bool:
        return self.sup_bound_met and self.final_bound_met


@dataclass(frozen=True)
class LelongEstimate:
    sequence: list[tuple[float, float]]
    extrapolated: float


@dataclass
class ProbeReport:
    rows: list[ProbeRow]
    lelong: dict[tuple[float, float], LelongEstimate] = field(default_factory=dict)


def _ball_mask(geom, center, r) -> np.ndarray:
    if r >= geom.period / 2:
        raise BallTooLarge(f"radius {r} does not embed in a torus of period {geom.period}")
    X, Y = grid(geom)
    P = geom.period
    dx = (X - center[0] + P / 2) % P - P / 2
    dy = (Y - center[1] + P / 2) % P - P / 2
    return dx * dx + dy * dy < r * r


def ball_integral(values: np.ndarray, geom, center, r) -> float:
    """Cell-centre indicator quadrature of a grid field over a geodesic ball."""
    mask = _ball_mask(geom, center, r)
    return float(np.sum(values[mask]) * torus.cell_area(geom))


def spectral_ball_integral(values: np.ndarray, geom, center, r) -> float:
    """Exact ball integral of the trigonometric interpolant of ``values``.

    Uses ``int_{B_r(c)} exp(i k.y) dy = exp(i k.c) 2 pi r J1(|k| r) / |k|``.
    """
    if r >= geom.period / 2:
        raise BallTooLarge(f"radius {r} does not embed in a torus of period {geom.period}")
    n = geom.grid_n
    k = 2 * np.pi / geom.period * np.fft.fftfreq(n, 1.0 / n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    km = np.hypot(kx, ky)
    c = np.fft.fft2(values) / n**2
    with np.errstate(invalid="ignore", divide="ignore"):
        kernel = np.where(km > 0, 2 * np.pi * r * j1(km * r) / km, np.pi * r * r)
    phase = np.exp(1j * (kx * center[0] + ky * center[1]))
    return float(np.real(np.sum(c * phase * kernel)))


def local_energy(phi: PotentialField, x, r: float, quadrature: str = "mask") -> float:
    """``r^{2-2n} int_{B_r(x)} e(phi) omega``."""
    geom = phi.geometry
    e = torus.energy_density(phi)
    integrate = ball_integral if quadrature == "mask" else spectral_ball_integral
    return r ** (2 - 2 * geom.n) * integrate(e, geom, x, r)


def sup_on_ball(values: np.ndarray, geom, center, r) -> float:
    mask = _ball_mask(geom, center, r)
    if not mask.any():
        return float("nan")
    return float(np.max(values[mask]))


def _extrapolate(sequence) -> float:
    """Value at r = 0 of the line through the last two ``(r^2, estimate)`` points."""
    if len(sequence) == 1:
        return sequence[0][1]
    (r1, v1), (r2, v2) = sequence[-2], sequence[-1]
    s1, s2 = r1 * r1, r2 * r2
    return v2 - s2 * (v1 - v2) / (s1 - s2)


def _flux_mass(psi: Callable, center, r: float, n_theta: int = 256) -> float:
    """``int_{B_r} Delta psi`` as half the outward flux of ``grad psi`` (Green)."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    c, s = np.cos(theta), np.sin(theta)
    h = 1e-4 * r
    outer = psi(center[0] + (r + h) * c, center[1] + (r + h) * s)
    inner = psi(center[0] + (r - h) * c, center[1] + (r - h) * s)
    dpsi_dr = (outer - inner) / (2 * h)
    return 0.5 * float(np.mean(dpsi_dr)) * 2 * np.pi * r


def lelong_estimate(psi, x, radii, c1: float = LELONG_C1) -> LelongEstimate:
    """Normalised ball masses ``c_1 int_{B_r(x)} Delta psi`` and their r -> 0 limit.

    ``psi`` is a PotentialField (exact spectral ball integrals, radii must
    span at least four grid cells) or a callable ``psi(x, y)`` on the plane
    (flux quadrature on the circle).
    """
    radii = [float(r) for r in radii]
    if isinstance(psi, PotentialField):
        geom = psi.geometry
        min_r = MIN_RADIUS_CELLS * geom.spacing
        if min(radii) < min_r:
            raise RadiiTooSmall(f"radius {min(radii):.3g} below {MIN_RADIUS_CELLS} cells ({min_r:.3g})")
        lap = torus.laplacian_values(psi.values, geom)
        # r^{2-2n} = 1 at n = 1
        seq = [(r, c1 * spectral_ball_integral(lap, geom, x, r)) for r in radii]
    else:
        seq = [(r, c1 * _flux_mass(psi, x, r)) for r in radii]
    return LelongEstimate(seq, float(_extrapolate(seq)))


def mollified_log(gamma: float, sigma: float, center=(0.0, 0.0)) -> Callable:
    """``gamma * log(|z - c|^2 + sigma^2) / 2`` as a callable on the plane."""

    def psi(x, y):
        return 0.5 * gamma * np.log((x - center[0]) ** 2 + (y - center[1]) ** 2 + sigma**2)

    return psi


def mollified_log_mass(gamma: float, sigma: float, r: float) -> float:
    """Closed form of ``c_1 int_{B_r} Delta psi`` for :func:`mollified_log`."""
    return gamma * r * r / (r * r + sigma * sigma)


def epsilon_report(phi: PotentialField, probe: ProbeConfig) -> ProbeReport:
    """Evaluate both links of the epsilon-regularity chain at every (x, r).

    Observational only: nothing here claims ``probe.epsilon`` is the
    epsilon of the regularity theorem.
    """
    geom = phi.geometry
    n = geom.n
    e = torus.energy_density(phi)
    rows = []
    for cx, cy in probe.centers:
        for r in probe.radii:
            mass = ball_integral(e, geom, (cx, cy), r)
            le = r ** (2 - 2 * n) * mass
            sup_half = sup_on_ball(e, geom, (cx, cy), r / 2)
            middle = 4 * r ** (-2 * n) / probe.epsilon * mass
            rows.append(
                ProbeRow(
                    x=float(cx),
                    y=float(cy),
                    r=float(r),
                    local_energy=le,
                    sup_half_ball=sup_half,
                    hypothesis_met=bool(le < probe.epsilon),
                    sup_bound_met=bool(sup_half < middle),
                    final_bound_met=bool(middle < 4 * r**-2),
                )
            )
    lelong = {}
    cells = MIN_RADIUS_CELLS * geom.spacing
    usable = [r for r in probe.radii if r >= cells]
    if usable:
        for c in probe.centers:
            lelong[(float(c[0]), float(c[1]))] = lelong_estimate(phi, c, usable, probe.lelong_c)
    return ProbeReport(rows, lelong)


PROBE_COLUMNS = (
    "x",
    "y",
    "r",
    "local_energy",
    "sup_half_ball",
    "hypothesis_met",
    "sup_bound_met",
    "final_bound_met",
    "conclusion_met",
)


def probe_row_values(row: ProbeRow) -> list:
    return [
        row.x,
        row.y,
        row.r,
        row.local_energy,
        row.sup_half_ball,
        row.hypothesis_met,
        row.sup_bound_met,
        row.final_bound_met,
        row.conclusion_met,
    ]
