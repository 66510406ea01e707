"""Energy functionals on the Kähler class: Aubin I, E, Mabuchi, Calabi."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PathTooCoarse
from .geometry import MetricSample, PotentialField, ToricPotential, sample
from .geometry import torus

# path nodes used by report() when no trajectory is available
DEFAULT_PATH_NODES = 33


@dataclass(frozen=True)
class FunctionalReport:
    aubin_I: float
    energy_E: float
    mabuchi: float
    calabi_energy: float
    s_hat: float
    min_u: float
    max_u: float
    sup_e: float
    sup_s_dev: float

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def _sample(field) -> MetricSample:
    return field if isinstance(field, MetricSample) else sample(field)


def aubin_I(field) -> float:
    """``I(phi) = int phi (omega - omega_phi)``."""
    s = _sample(field)
    return float(np.sum(s.potential * s.weights * (1.0 - s.u)))


def energy_E(field) -> float:
    """``E(phi) = -int phi omega_phi``."""
    s = _sample(field)
    return float(-np.sum(s.potential * s.phi_weights))


def average_scalar(field) -> float:
    return _sample(field).s_hat


def calabi_energy(field) -> float:
    """``int (S - S_hat)^2 omega_phi``."""
    s = _sample(field)
    dev = s.scalar - s.s_hat
    return float(np.sum(dev**2 * s.phi_weights))


def potential_mean(field) -> float:
    """``int phi omega``; on the torus read from the zero Fourier mode."""
    if isinstance(field, PotentialField):
        g = field.geometry
        return torus.mean_against_omega(field.values, g) * g.volume
    s = _sample(field)
    return float(np.sum(s.potential * s.weights))


def potential_increment(a, b) -> np.ndarray:
    """Change of the Kähler potential from ``a`` to ``b`` at fixed complex points.

    On the toric backend the nodes are symplectic coordinates; there
    ``d phi = -2 d f`` at corresponding points.
    """
    if isinstance(a, ToricPotential):
        return -2.0 * (b.f - a.f)
    return b.values - a.values


def mabuchi_increment(a, b, sa: MetricSample | None = None, sb: MetricSample | None = None) -> float:
    """Trapezoidal quadrature of ``int dphi (S_hat - S) omega_phi`` over one segment."""
    sa = sample(a) if sa is None else sa
    sb = sample(b) if sb is None else sb
    dphi = potential_increment(a, b)
    ga = (sa.s_hat - sa.scalar) * sa.phi_weights
    gb = (sb.s_hat - sb.scalar) * sb.phi_weights
    return float(0.5 * np.sum(dphi * (ga + gb)))


def mabuchi_path(path, max_jump: float = 0.25) -> float:
    """Mabuchi energy at the end of ``path`` relative to its start.

    ``path`` is a sequence of ``(t, field)``; the variation is integrated by the
    trapezoidal rule with the potential derivative differenced between
    consecutive nodes.  The parameter values only order the nodes.
    """
    nodes = list(path)
    if len(nodes) < 2:
        raise ValueError("a Mabuchi path needs at least two nodes")
    total = 0.0
    prev_t, prev = nodes[0]
    prev_s = sample(prev)
    for t, field in nodes[1:]:
        if t <= prev_t:
            raise ValueError("path parameters must increase")
        jump = float(np.max(np.abs(potential_increment(prev, field))))
        if jump > max_jump:
            raise PathTooCoarse(f"potential jumps by {jump:.3g} > {max_jump:.3g} between nodes")
        s = sample(field)
        total += mabuchi_increment(prev, field, prev_s, s)
        prev_t, prev, prev_s = t, field, s
    return total


def linear_path(field, nodes: int = DEFAULT_PATH_NODES):
    """Straight segment from the reference metric to ``field`` (stays Kähler by convexity)."""
    ts = np.linspace(0.0, 1.0, nodes)
    vals = field.values
    return [(float(t), field.with_values(t * vals)) for t in ts]


def report(field, mabuchi: float | None = None) -> FunctionalReport:
    """Snapshot of all functionals.  Without ``mabuchi`` it is integrated along
    the straight path from the reference metric."""
    s = sample(field)
    if mabuchi is None:
        if np.any(field.values):
            mabuchi = mabuchi_path(linear_path(field), max_jump=math.inf)
        else:
            mabuchi = 0.0
    s_hat = s.s_hat
    dev = s.scalar - s_hat
    return FunctionalReport(
        aubin_I=aubin_I(s),
        energy_E=energy_E(s),
        mabuchi=float(mabuchi),
        calabi_energy=float(np.sum(dev**2 * s.phi_weights)),
        s_hat=s_hat,
        min_u=float(np.min(s.u)),
        max_u=float(np.max(s.u)),
        # e = Lambda_omega omega_phi coincides with u when n = 1
        sup_e=float(np.max(s.u)),
        sup_s_dev=float(np.max(np.abs(dev))),
    )
