"""Time integration of the Calabi flow ``d phi/dt = S(omega_phi) - S_hat``.

Torus steps are linearly implicit in Fourier space,

    (1 + a dt Delta^2) phi_new = phi_old + dt (rhs(phi_old) + a Delta^2 phi_old),

which is backward Euler for the flat linearisation when ``a = 1``.  The
leading symbol of the linearised right-hand side at density ``u`` is
``u^-2 Delta^2``; the frozen-mode amplification stays inside the unit disc
only if ``a >= max(u^-2) / 2``, so ``a`` is raised per step to
``STABILITY_MARGIN * max(u^-2)`` whenever that exceeds the configured value.
The toric backend evolves the smooth part of the symplectic potential by
``df/dt = -(S - S_hat) / 2`` and freezes the banded linearisation of that
right-hand side at the start of every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InsufficientData, NotKahler, StepFailure
from .functionals import FunctionalReport, mabuchi_increment
from .geometry import GeometryConfig, MetricSample, PotentialField, ToricPotential, sample
from .geometry import toric, torus

Field = Union[PotentialField, ToricPotential]

CONVERGED = "converged"
T_MAX_REACHED = "t_max_reached"
NOT_KAHLER = "not_kahler"
STEP_FAILURE = "step_failure"

# floor for the stabilisation, as a multiple of max(u^-2)
STABILITY_MARGIN = 0.75


@dataclass(frozen=True)
class FlowConfig:
    geometry: GeometryConfig
    initial: Field
    dt_init: float = 1e-3
    dt_max: float = 0.1
    t_max: float = 100.0
    stop_calabi_tol: float = 1e-12
    stabilization: float = 1.0
    monitor_every: int = 1
    epsilon_probe: float = 1.0
    # user threshold K for the curvature / I-functional monitors
    k_threshold: float | None = None
    dt_growth: float = 1.2
    dt_min_factor: float = 1e-12

    def __post_init__(self):
        if not (0 < self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_init <= dt_max")
        if self.t_max <= 0 or self.stop_calabi_tol <= 0:
            raise ValueError("t_max and stop_calabi_tol must be positive")
        if self.stabilization <= 0 or self.epsilon_probe <= 0:
            raise ValueError("stabilization and epsilon_probe must be positive")
        if int(self.monitor_every) != self.monitor_every or self.monitor_every < 1:
            raise ValueError("monitor_every must be a positive integer")
        if self.initial.geometry != self.geometry:
            raise ValueError("initial field does not live on the configured geometry")

    @property
    def dt_min(self) -> float:
        return self.dt_min_factor * self.dt_init


@dataclass(frozen=True, eq=False)
class FlowState:
    t: float
    field: Field
    report: FunctionalReport
    metric: MetricSample = field(repr=False)


@dataclass(frozen=True)
class FlowRecord:
    t: float
    dt: float
    calabi_energy: float
    mabuchi: float
    aubin_I: float
    energy_E: float
    s_hat: float
    sup_s_dev: float
    min_u: float
    max_u: float
    sup_e: float
    sup_s: float
    retries: int = 0


TRAJECTORY_COLUMNS = (
    "t",
    "dt",
    "calabi_energy",
    "mabuchi",
    "aubin_I",
    "energy_E",
    "s_hat",
    "sup_s_dev",
    "min_u",
    "max_u",
    "sup_e",
)


@dataclass
class FlowTrajectory:
    records: list[FlowRecord]
    terminal_status: str
    final_state: FlowState | None = None
    steps: int = 0
    message: str = ""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _report(metric: MetricSample, mabuchi: float) -> FunctionalReport:
    s_hat = metric.s_hat
    dev = metric.scalar - s_hat
    return FunctionalReport(
        aubin_I=float(np.sum(metric.potential * metric.weights * (1.0 - metric.u))),
        energy_E=float(-np.sum(metric.potential * metric.phi_weights)),
        mabuchi=float(mabuchi),
        calabi_energy=float(np.sum(dev**2 * metric.phi_weights)),
        s_hat=s_hat,
        min_u=float(np.min(metric.u)),
        max_u=float(np.max(metric.u)),
        sup_e=float(np.max(metric.u)),
        sup_s_dev=float(np.max(np.abs(dev))),
    )


def _gauge(fld: Field) -> Field:
    vals = fld.values
    if isinstance(fld, PotentialField):
        return fld.with_values(vals - torus.mean_against_omega(vals, fld.geometry))
    return fld.with_values(vals - np.mean(vals))


def initial_state(fld: Field) -> FlowState:
    """Gauge-fixed state at t = 0 with Mabuchi normalised to zero."""
    fld = _gauge(fld)
    metric = sample(fld)
    return FlowState(0.0, fld, _report(metric, 0.0), metric)


def rhs(fld: Field, metric: MetricSample | None = None) -> np.ndarray:
    """Velocity of the evolved variable: ``S - S_hat`` (torus) or
    ``-(S - S_hat)/2`` for the toric smooth part."""
    metric = sample(fld) if metric is None else metric
    dev = metric.scalar - metric.s_hat
    if isinstance(fld, ToricPotential):
        return -0.5 * dev
    return dev


def step(state: FlowState, dt: float, stabilization: float = 1.0, dt_min: float = 0.0) -> FlowState:
    """One stabilised IMEX step.  Raises NotKahler if positivity is lost."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt < dt_min:
        raise StepFailure(f"dt {dt:.3g} underflows dt_min {dt_min:.3g}")
    fld = state.field
    a = stabilization
    r = rhs(fld, state.metric)
    if isinstance(fld, PotentialField):
        g = fld.geometry
        a = max(a, STABILITY_MARGIN * float(np.max(state.metric.u ** -2.0)))
        denom = 1.0 + a * dt * torus.bilaplacian_symbol(g)
        delta = np.fft.irfft2(np.fft.rfft2(dt * r) / denom, s=(g.grid_n, g.grid_n))
    else:
        lin = toric.implicit_operator(fld)
        system = (sp.identity(lin.shape[0], format="csc") + (a * dt) * lin).tocsc()
        delta = spla.spsolve(system, dt * r)
    new_vals = fld.values + delta
    if not np.all(np.isfinite(new_vals)):
        raise NotKahler(float("nan"))
    new = _gauge(fld.with_values(new_vals))
    metric = sample(new)
    if not np.all(np.isfinite(metric.scalar)):
        raise NotKahler(float(np.min(metric.u)))
    m = state.report.mabuchi + mabuchi_increment(fld, new, state.metric, metric)
    return FlowState(state.t + dt, new, _report(metric, m), metric)


def _record(state: FlowState, dt: float, retries: int) -> FlowRecord:
    rep = state.report
    return FlowRecord(
        t=state.t,
        dt=dt,
        calabi_energy=rep.calabi_energy,
        mabuchi=rep.mabuchi,
        aubin_I=rep.aubin_I,
        energy_E=rep.energy_E,
        s_hat=rep.s_hat,
        sup_s_dev=rep.sup_s_dev,
        min_u=rep.min_u,
        max_u=rep.max_u,
        sup_e=rep.sup_e,
        sup_s=float(np.max(np.abs(state.metric.scalar))),
        retries=retries,
    )


def run(config: FlowConfig, on_record: Callable[[FlowState], None] | None = None) -> FlowTrajectory:
    """Integrate until the Calabi energy drops below tolerance, ``t_max``, or failure.

    ``on_record`` is called with every state that produces a monitor record.
    """
    try:
        state = initial_state(config.initial)
    except NotKahler as exc:
        return FlowTrajectory([], NOT_KAHLER, message=str(exc))

    records = [_record(state, 0.0, 0)]
    if on_record is not None:
        on_record(state)
    if state.report.calabi_energy <= config.stop_calabi_tol:
        return FlowTrajectory(records, CONVERGED, state, 0)

    dt = config.dt_init
    steps = 0
    retries = 0
    last_dt = 0.0
    status = T_MAX_REACHED
    message = ""
    # relative slack so float accumulation in t cannot leave a sliver step
    t_end = config.t_max * (1 - 1e-14)
    while state.t < t_end:
        dt_try = min(dt, config.dt_max, config.t_max - state.t)
        try:
            new = step(state, dt_try, config.stabilization, config.dt_min)
        except NotKahler:
            dt = dt_try / 2
            retries += 1
            continue
        except StepFailure as exc:
            status, message = STEP_FAILURE, str(exc)
            break
        state = new
        steps += 1
        last_dt = dt_try
        done = state.report.calabi_energy <= config.stop_calabi_tol
        if done or steps % config.monitor_every == 0 or state.t >= t_end:
            records.append(_record(state, last_dt, retries))
            retries = 0
            if on_record is not None:
                on_record(state)
        if done:
            status = CONVERGED
            break
        dt = min(dt_try * config.dt_growth, config.dt_max)

    if records[-1].t != state.t:
        records.append(_record(state, last_dt, retries))
        if on_record is not None:
            on_record(state)
    return FlowTrajectory(records, status, state, steps, message)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r_squared: float
    t_start: float
    t_end: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "r_squared": self.r_squared,
            "window": [self.t_start, self.t_end],
            "n_points": self.n_points,
        }


def fit_decay_series(t, energy, tail_fraction: float = 0.5) -> DecayFit:
    """Least-squares fit of ``log energy`` against ``t`` over the trailing window."""
    if not (0 < tail_fraction <= 1):
        raise ValueError("tail_fraction must lie in (0, 1]")
    t = np.asarray(t, dtype=float)
    energy = np.asarray(energy, dtype=float)
    k = max(int(math.ceil(tail_fraction * len(t))), 0)
    t, energy = t[len(t) - k:], energy[len(energy) - k:]
    keep = energy > 0
    t, energy = t[keep], energy[keep]
    if len(t) < 3:
        raise InsufficientData(f"{len(t)} usable records in the fit window, need 3")
    y = np.log(energy)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else (1.0 - ss_res / ss_tot if ss_res <= ss_tot else 0.0)
    return DecayFit(float(-slope), r2, float(t[0]), float(t[-1]), int(len(t)))


def fit_decay(trajectory: FlowTrajectory, tail_fraction: float = 0.5) -> DecayFit:
    return fit_decay_series(
        trajectory.column("t"), trajectory.column("calabi_energy"), tail_fraction
    )


def record_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(FlowRecord))
