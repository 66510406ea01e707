import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from calabi_lab import regularity as reg
from calabi_lab.errors import BallTooLarge, RadiiTooSmall
from calabi_lab.fields import random_kahler_field, trig_field
from calabi_lab.geometry import GeometryConfig, torus, zero_field


def test_probe_config_validation():
    with pytest.raises(ValueError):
        reg.ProbeConfig(centers=[(0, 0)], radii=[0.5, 1.0])
    with pytest.raises(ValueError):
        reg.ProbeConfig(centers=[(0, 0)], radii=[0.5, 0.5])
    with pytest.raises(ValueError):
        reg.ProbeConfig(centers=[(0, 0)], radii=[0.5], epsilon=0)


@pytest.mark.parametrize("center", [(0.0, 0.0), (1.3, 4.1), (math.pi, math.pi)])
def test_flat_local_energy(center):
    g = GeometryConfig(grid_n=256)
    le = reg.local_energy(zero_field(g), center, 0.5)
    assert le == pytest.approx(math.pi * 0.25, rel=1e-2)


def test_flat_local_energy_converges():
    # masked quadrature error is O(h) in the worst case; check it over a spread of radii
    errs = []
    for n in (64, 128, 256, 512):
        g = GeometryConfig(grid_n=n)
        rs = np.linspace(0.6, 1.4, 17)
        errs.append(max(abs(reg.local_energy(zero_field(g), (0.1, 0.2), r) / r**2 - math.pi) for r in rs))
    assert errs[-1] < errs[0] / 4
    assert errs[-1] < 0.01


def test_spectral_ball_integral_is_exact_for_constants(torus64):
    val = reg.spectral_ball_integral(np.ones(torus64.shape), torus64, (0.3, 0.7), 1.1)
    assert val == pytest.approx(math.pi * 1.1**2, rel=1e-14)


def test_cosine_local_energy_at_node_line():
    # e = 1 - (eps/2) cos x vanishes to first order in the ball average at x = pi/2
    g = GeometryConfig(grid_n=256)
    eps, r = 0.1, 0.5
    le = reg.local_energy(trig_field(g, [(1, 0, eps)]), (math.pi / 2, 0.0), r)
    assert le == pytest.approx(math.pi * r * r, rel=2e-2)
    exact = math.pi * r * r
    spectral = reg.local_energy(trig_field(g, [(1, 0, eps)]), (math.pi / 2, 0.0), r, quadrature="spectral")
    assert spectral == pytest.approx(exact, rel=1e-12)


@given(st.integers(0, 10_000))
def test_local_energy_measure_bound(seed):
    g = GeometryConfig(grid_n=128)
    fld = random_kahler_field(g, seed)
    e = torus.energy_density(fld)
    r = 0.7
    le = reg.local_energy(fld, (1.0, 2.0), r)
    assert 0 <= le <= e.max() * math.pi * r * r * (1 + 4 * g.spacing / r)


def test_ball_too_large(torus64):
    with pytest.raises(BallTooLarge):
        reg.local_energy(zero_field(torus64), (0, 0), math.pi)
    with pytest.raises(BallTooLarge):
        reg.epsilon_report(zero_field(torus64), reg.ProbeConfig([(0, 0)], [3.5]))


def test_epsilon_report_flat_example():
    g = GeometryConfig(grid_n=256)
    rep = reg.epsilon_report(zero_field(g), reg.ProbeConfig([(0.0, 0.0)], [0.5], epsilon=10.0))
    (row,) = rep.rows
    assert row.hypothesis_met  # pi/4 < 10
    assert row.sup_half_ball == 1.0
    # middle term 4 r^-2 / eps * int e = 16 * (pi / 4) / 10 ~ 1.257
    middle = 4 * 0.25**-1 / 10 * row.local_energy
    assert middle == pytest.approx(0.4 * math.pi, rel=1e-2)
    assert row.sup_bound_met == (1.0 < middle)
    assert row.final_bound_met == (middle < 16)
    assert row.conclusion_met


def test_epsilon_report_rows_cover_all_pairs(torus64):
    centers = [(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]
    radii = [1.0, 0.5, 0.25]
    rep = reg.epsilon_report(random_kahler_field(torus64, 1), reg.ProbeConfig(centers, radii))
    assert [(r.x, r.y, r.r) for r in rep.rows] == [(c[0], c[1], r) for c in centers for r in radii]
    assert set(rep.lelong) == set(centers)


def test_lelong_radii_too_small(torus64):
    with pytest.raises(RadiiTooSmall):
        reg.lelong_estimate(zero_field(torus64), (0, 0), [0.5, 0.3])


def test_c1_normalisation_for_log():
    # log|z| itself: flux quadrature is exact on circles
    est = reg.lelong_estimate(lambda x, y: 0.5 * np.log(x * x + y * y), (0.0, 0.0), [1.0, 0.5])
    assert est.extrapolated == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_mollified_log_recovery(gamma):
    radii = [1.0, 0.5, 0.25]
    sigma = radii[-1] / 16
    est = reg.lelong_estimate(reg.mollified_log(gamma, sigma), (0.0, 0.0), radii)
    assert est.extrapolated == pytest.approx(gamma, rel=0.05)
    for r, v in est.sequence:
        assert v == pytest.approx(reg.mollified_log_mass(gamma, sigma, r), rel=1e-6)


@given(st.floats(0.1, 10.0))
def test_lelong_linearity(a):
    radii = [1.0, 0.5, 0.25]
    base = reg.lelong_estimate(reg.mollified_log(1.0, 0.02), (0.0, 0.0), radii)
    scaled = reg.lelong_estimate(reg.mollified_log(a, 0.02), (0.0, 0.0), radii)
    assert scaled.extrapolated == pytest.approx(a * base.extrapolated, rel=1e-8)


@given(st.integers(0, 10_000))
def test_smooth_fields_have_zero_lelong(seed):
    g = GeometryConfig(grid_n=128)
    fld = random_kahler_field(g, seed)
    for c in [(0.0, 0.0), (2.0, 5.0)]:
        est = reg.lelong_estimate(fld, c, [0.4, 0.3, 0.2])
        assert abs(est.extrapolated) <= 1e-3


@given(st.integers(0, 10_000))
def test_monotone_mass(seed):
    g = GeometryConfig(grid_n=128)
    fld = random_kahler_field(g, seed)
    e = torus.energy_density(fld)
    radii = np.linspace(0.2, 2.5, 12)
    masses = [reg.spectral_ball_integral(e, g, (1.0, 1.0), r) for r in radii]
    assert np.all(np.diff(masses) >= -1e-10)


def test_probe_row_values_match_columns(torus64):
    rep = reg.epsilon_report(zero_field(torus64), reg.ProbeConfig([(0, 0)], [1.0]))
    assert len(reg.probe_row_values(rep.rows[0])) == len(reg.PROBE_COLUMNS)
