import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from calabi_lab import flow
from calabi_lab.errors import InsufficientData, NotKahler, StepFailure
from calabi_lab.fields import random_kahler_field, trig_field
from calabi_lab.geometry import GeometryConfig, grid, toric, torus, zero_field


def _cos_amplitude(fld):
    X, _ = grid(fld.geometry)
    return 2 * np.mean(fld.values * np.cos(X))


def test_flow_config_validation(torus32):
    z = zero_field(torus32)
    with pytest.raises(ValueError):
        flow.FlowConfig(torus32, z, dt_init=1.0, dt_max=0.1)
    with pytest.raises(ValueError):
        flow.FlowConfig(torus32, z, stop_calabi_tol=0)
    with pytest.raises(ValueError):
        flow.FlowConfig(torus32, z, monitor_every=0)
    with pytest.raises(ValueError):
        flow.FlowConfig(GeometryConfig(grid_n=16), z)
    assert flow.FlowConfig(torus32, z, dt_init=1e-3).dt_min == pytest.approx(1e-15)


def test_rhs_fixed_point(torus32):
    assert np.max(np.abs(flow.rhs(zero_field(torus32)))) == 0.0


def test_rhs_linearisation(torus64):
    eps = 0.01
    X, _ = grid(torus64)
    r = flow.rhs(trig_field(torus64, [(1, 0, eps)]))
    assert np.max(np.abs(r + eps / 4 * np.cos(X))) < 2 * eps**2


def test_rhs_toric_guillemin(toric64):
    assert np.max(np.abs(flow.rhs(toric.toric_potential(toric64)))) < 1e-10


@given(st.floats(1e-4, 10.0))
def test_step_fixed_point(dt):
    g = GeometryConfig(grid_n=32)
    state = flow.initial_state(zero_field(g))
    new = flow.step(state, dt)
    assert np.max(np.abs(new.field.values)) == 0.0
    assert new.t == pytest.approx(dt)


def test_step_errors(torus32):
    state = flow.initial_state(zero_field(torus32))
    with pytest.raises(ValueError):
        flow.step(state, 0.0)
    with pytest.raises(StepFailure):
        flow.step(state, 1e-9, dt_min=1e-6)


def test_linear_mode_decay(torus64):
    # amplitude of eps cos x decays like exp(-t/4)
    eps, dt, T = 1e-3, 0.01, 8.0
    state = flow.initial_state(trig_field(torus64, [(1, 0, eps)]))
    for _ in range(int(round(T / dt))):
        state = flow.step(state, dt)
    assert state.t == pytest.approx(T)
    assert _cos_amplitude(state.field) == pytest.approx(eps * math.exp(-T / 4), rel=1e-2)


def test_linear_mode_decay_against_fine_explicit_reference(torus32):
    # explicit Euler at dt = 1e-4 resolves the mode-1 dynamics without any stabilisation
    eps, T = 0.05, 2.0
    fld0 = trig_field(torus32, [(1, 0, eps)])
    ref = fld0.values.copy()
    for _ in range(20000):
        ref = ref + 1e-4 * flow.rhs(fld0.with_values(ref))
    state = flow.initial_state(fld0)
    for _ in range(400):
        state = flow.step(state, T / 400)
    a_ref = _cos_amplitude(fld0.with_values(ref))
    assert _cos_amplitude(state.field) == pytest.approx(a_ref, rel=1e-2)


def test_run_zero_initial(torus32):
    traj = flow.run(flow.FlowConfig(torus32, zero_field(torus32)))
    assert traj.terminal_status == flow.CONVERGED
    assert len(traj.records) == 1 and traj.records[0].calabi_energy == 0.0


def test_run_not_kahler_initial(torus32):
    traj = flow.run(flow.FlowConfig(torus32, trig_field(torus32, [(1, 0, 5.0)])))
    assert traj.terminal_status == flow.NOT_KAHLER
    assert traj.records == []


def test_run_step_failure(torus32, monkeypatch):
    # every trial loses positivity, so run halves dt until dt_min is crossed
    def always_fails(state, dt, stabilization=1.0, dt_min=0.0):
        if dt < dt_min:
            raise StepFailure("dt underflow")
        raise NotKahler(-1.0)

    monkeypatch.setattr(flow, "step", always_fails)
    cfg = flow.FlowConfig(torus32, trig_field(torus32, [(1, 0, 0.1)]))
    traj = flow.run(cfg)
    assert traj.terminal_status == flow.STEP_FAILURE
    assert len(traj.records) >= 1


def test_run_t_max(torus32):
    cfg = flow.FlowConfig(torus32, trig_field(torus32, [(1, 0, 0.1)]), dt_init=0.01, t_max=1.0)
    traj = flow.run(cfg)
    assert traj.terminal_status == flow.T_MAX_REACHED
    assert traj.records[-1].t == pytest.approx(1.0)


@settings(max_examples=5)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_run_invariants(seed, monitor_every):
    g = GeometryConfig(grid_n=32)
    fld = random_kahler_field(g, seed)
    seen = []
    cfg = flow.FlowConfig(g, fld, dt_init=1e-3, dt_max=0.1, t_max=5.0, monitor_every=monitor_every)
    traj = flow.run(cfg, on_record=seen.append)
    t = traj.column("t")
    M = traj.column("mabuchi")
    assert np.all(np.diff(t) > 0)
    assert np.all(np.diff(M) <= 1e-10 * (1 + np.abs(M[:-1])))
    assert len(seen) == len(traj.records)
    for state in seen:
        assert abs(torus.mean_against_omega(state.field.values, g)) < 1e-12
        assert np.sum(state.metric.phi_weights) == pytest.approx(g.volume, rel=1e-10)
        assert state.report.min_u > 0
    if traj.terminal_status == flow.CONVERGED:
        assert traj.records[-1].calabi_energy <= cfg.stop_calabi_tol


def test_fixed_point_stability_torus(torus32):
    state = flow.initial_state(zero_field(torus32))
    rng = np.random.default_rng(0)
    while state.t < 100:
        state = flow.step(state, float(rng.uniform(0.01, 5.0)))
    assert np.max(np.abs(state.field.values)) <= 1e-9


def test_fixed_point_stability_toric(toric64):
    state = flow.initial_state(toric.toric_potential(toric64))
    f0 = state.field.f.copy()
    rng = np.random.default_rng(0)
    while state.t < 100:
        state = flow.step(state, float(rng.uniform(0.01, 5.0)))
    assert np.max(np.abs(state.field.f - f0)) <= 1e-9


def test_toric_flow_rate_matches_sphere_spectrum():
    # slowest non-holomorphic mode on the round sphere: l = 2, mu = l (l + 1) = 6,
    # amplitude rate mu (mu - 2) = 24; backward Euler at fixed dt gives log(1 + 24 dt) / dt
    g = GeometryConfig(backend="toric", grid_n=128)
    f0 = toric.toric_potential(g, lambda x: 1e-3 * (x * (1 - x)) ** 2)
    dt = 1e-3
    traj = flow.run(flow.FlowConfig(g, f0, dt_init=dt, dt_max=dt, t_max=1.0, stop_calabi_tol=1e-20))
    rate = flow.fit_decay(traj, 0.3).rate
    assert rate == pytest.approx(2 * math.log1p(24 * dt) / dt, rel=1e-3)
    M = traj.column("mabuchi")
    assert np.all(np.diff(M) <= 1e-10 * (1 + np.abs(M[:-1])))


def test_toric_flow_converges_to_round_metric():
    g = GeometryConfig(backend="toric", grid_n=64)
    f0 = toric.toric_potential(g, lambda x: 0.005 * np.sin(np.pi * x) ** 2)
    traj = flow.run(flow.FlowConfig(g, f0, dt_init=1e-4, dt_max=1e-2, t_max=20))
    assert traj.terminal_status == flow.CONVERGED
    assert traj.records[-1].sup_s_dev < 1e-5
    assert traj.records[-1].s_hat == pytest.approx(2.0, abs=1e-8)
    M = traj.column("mabuchi")
    assert np.all(np.diff(M) <= 1e-10 * (1 + np.abs(M[:-1])))


def test_fit_decay_synthetic():
    t = np.linspace(0, 5, 40)
    fit = flow.fit_decay_series(t, np.exp(-3 * t), 1.0)
    assert fit.rate == pytest.approx(3.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points == 40
    const = flow.fit_decay_series(t, np.full_like(t, 2.0))
    assert abs(const.rate) < 1e-12
    with pytest.raises(InsufficientData):
        flow.fit_decay_series([0, 1], [1.0, 0.5])
    # non-positive energies are dropped before counting
    with pytest.raises(InsufficientData):
        flow.fit_decay_series([0, 1, 2, 3], [1.0, 0.0, 0.0, -1.0], 1.0)
    with pytest.raises(ValueError):
        flow.fit_decay_series(t, np.exp(-t), 0.0)


def test_trajectory_columns_are_record_fields():
    names = flow.record_fields()
    assert all(c in names for c in flow.TRAJECTORY_COLUMNS)
    assert flow.TRAJECTORY_COLUMNS[:3] == ("t", "dt", "calabi_energy")
