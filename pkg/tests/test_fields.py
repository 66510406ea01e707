import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from calabi_lab import fields
from calabi_lab.geometry import GeometryConfig, PotentialField, ToricPotential, density, toric


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_random_field_min_density(seed, min_u):
    g = GeometryConfig(grid_n=32)
    fld = fields.random_kahler_field(g, seed, min_u=min_u)
    assert density(fld).min_u == pytest.approx(min_u, abs=1e-12)


def test_random_field_deterministic(torus32):
    a = fields.random_kahler_field(torus32, 7)
    b = fields.random_kahler_field(torus32, 7)
    c = fields.random_kahler_field(torus32, 8)
    assert np.array_equal(a.values, b.values)
    assert not np.allclose(a.values, c.values)


def test_random_field_band_limit(torus32):
    fld = fields.random_kahler_field(torus32, 3)
    c = np.abs(np.fft.fft2(fld.values))
    k = np.fft.fftfreq(32, 1 / 32)
    outside = (np.abs(k)[:, None] > fields.RANDOM_MAX_MODE) | (np.abs(k)[None, :] > fields.RANDOM_MAX_MODE)
    assert np.max(c[outside]) < 1e-10 * np.max(c)
    assert abs(c[0, 0]) < 1e-10 * np.max(c)


def test_random_field_grid_too_coarse():
    with pytest.raises(ValueError):
        fields.random_kahler_field(GeometryConfig(grid_n=16), 0)


def test_field_json_round_trip(tmp_path, torus32, toric64):
    for fld in (fields.random_kahler_field(torus32, 1), fields.toric_polynomial(toric64, [0, 0, 0.01])):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(fields.field_to_dict(fld)))
        back = fields.load_field(path)
        assert type(back) is type(fld)
        assert back.geometry == fld.geometry
        assert np.array_equal(back.values, fld.values)


def test_field_from_dict_errors(torus32):
    d = fields.field_to_dict(fields.trig_field(torus32, [(1, 0, 0.1)]))
    d["values"] = d["values"][:-1]
    with pytest.raises(ValueError):
        fields.field_from_dict(d)
    with pytest.raises(KeyError):
        fields.field_from_dict({"grid_n": 32})


def test_trig_field_kinds(torus32):
    x = fields.trig_field(torus32, [(1, 0, 1.0, "sin")]).values
    assert isinstance(fields.trig_field(torus32, []), PotentialField)
    assert x[0, 0] == 0.0
    with pytest.raises(KeyError):
        fields.trig_field(torus32, [(1, 0, 1.0, "tan")])


def test_toric_polynomial(toric64):
    tp = fields.toric_polynomial(toric64, [1.0, 0.0, 2.0])
    x = toric.nodes(toric64)
    assert isinstance(tp, ToricPotential)
    np.testing.assert_allclose(tp.f, 1 + 2 * x**2)
