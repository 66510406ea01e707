"""Initial data: trigonometric fields, seeded random fields, field files."""

from __future__ import annotations

import json
import math

import numpy as np

from .geometry import GeometryConfig, PotentialField, ToricPotential, grid, toric, torus

RANDOM_MAX_MODE = 4
RANDOM_MIN_U = 0.5
# Gaussian spectral envelope exp(-|k|^2 / RANDOM_ENVELOPE) on the random coefficients
RANDOM_ENVELOPE = 0.5


def trig_field(geom: GeometryConfig, modes) -> PotentialField:
    """Sum of ``amp * cos|sin(j x + k y)`` terms.

    ``modes`` is an iterable of ``(j, k, amp)`` or ``(j, k, amp, kind)`` with
    kind ``"cos"`` (default) or ``"sin"``.
    """
    X, Y = grid(geom)
    scale = 2 * math.pi / geom.period
    vals = np.zeros(geom.shape)
    for m in modes:
        j, k, amp = m[0], m[1], m[2]
        kind = m[3] if len(m) > 3 else "cos"
        fn = {"cos": np.cos, "sin": np.sin}[kind]
        vals += amp * fn(scale * (j * X + k * Y))
    return PotentialField(vals, geom)


def random_kahler_field(
    geom: GeometryConfig,
    seed: int,
    min_u: float = RANDOM_MIN_U,
    max_mode: int = RANDOM_MAX_MODE,
) -> PotentialField:
    """Band-limited random potential (modes ``|j|, |k| <= max_mode``) rescaled so
    that ``min(1 + Delta phi) == min_u``."""
    if 2 * max_mode >= geom.grid_n // 2:
        raise ValueError("grid too coarse for the requested band limit")
    rng = np.random.default_rng(seed)
    X, Y = grid(geom)
    scale = 2 * math.pi / geom.period
    vals = np.zeros(geom.shape)
    for j in range(0, max_mode + 1):
        for k in range(-max_mode, max_mode + 1):
            if j == 0 and k <= 0:
                continue
            env = math.exp(-(j * j + k * k) / RANDOM_ENVELOPE)
            a, b = rng.standard_normal(2) * env
            arg = scale * (j * X + k * Y)
            vals += a * np.cos(arg) + b * np.sin(arg)
    lap = torus.laplacian_values(vals, geom)
    vals *= (1.0 - min_u) / float(-np.min(lap))
    return PotentialField(vals, geom)


def field_to_dict(fld) -> dict:
    d = fld.geometry.to_dict()
    d["values"] = [float(v) for v in np.asarray(fld.values).ravel()]
    return d


def field_from_dict(d: dict):
    """Inverse of :func:`field_to_dict` (raises KeyError/ValueError on bad input)."""
    geom = GeometryConfig(
        backend=d["backend"],
        grid_n=int(d["grid_n"]),
        period=float(d.get("period", 2 * math.pi)),
        polytope_length=float(d.get("polytope_length", 1.0)),
    )
    vals = np.asarray(d["values"], dtype=float)
    if vals.size != int(np.prod(geom.shape)):
        raise ValueError(f"expected {int(np.prod(geom.shape))} values, got {vals.size}")
    vals = vals.reshape(geom.shape)
    if geom.backend == "toric":
        return ToricPotential(vals, geom)
    return PotentialField(vals, geom)


def load_field(path):
    with open(path) as fh:
        return field_from_dict(json.load(fh))


def toric_polynomial(geom: GeometryConfig, coeffs) -> ToricPotential:
    """Smooth part ``f(x) = sum_k coeffs[k] x^k`` on the moment interval."""
    return toric.toric_potential(geom, lambda x: np.polyval(list(coeffs)[::-1], x))
