"""Spectral geometry of a conformal metric on the flat square torus.

The reference form is ``omega = dx ^ dy`` and the Laplacian is normalised as
``Delta = (d_xx + d_yy) / 2`` so that ``sqrt(-1) dd-bar phi = (Delta phi) omega``
and the metric density of ``omega_phi`` is ``u = 1 + Delta phi``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import NotKahler
from .types import GeometryConfig, MetricDensity, MetricSample, PotentialField


@lru_cache(maxsize=32)
def _symbols(n: int, period: float):
    k = 2 * np.pi / period * np.fft.fftfreq(n, 1.0 / n)
    kr = 2 * np.pi / period * np.fft.rfftfreq(n, 1.0 / n)
    kx, ky = np.meshgrid(k, kr, indexing="ij")
    lap = -0.5 * (kx**2 + ky**2)
    # first derivatives drop the unpaired Nyquist mode
    kx_d = kx.copy()
    ky_d = ky.copy()
    kx_d[n // 2, :] = 0.0
    ky_d[:, -1] = 0.0
    for arr in (lap, kx_d, ky_d):
        arr.setflags(write=False)
    return lap, kx_d, ky_d


def grid(geom: GeometryConfig):
    """Coordinate arrays ``(X, Y)`` with ``X[i, j] = x_i``."""
    x = np.arange(geom.grid_n) * geom.spacing
    return np.meshgrid(x, x, indexing="ij")


def cell_area(geom: GeometryConfig) -> float:
    return geom.spacing**2


def _fft(values):
    return np.fft.rfft2(values)


def _ifft(coeffs, n):
    return np.fft.irfft2(coeffs, s=(n, n))


def laplacian_values(values: np.ndarray, geom: GeometryConfig) -> np.ndarray:
    lap, _, _ = _symbols(geom.grid_n, geom.period)
    return _ifft(lap * _fft(values), geom.grid_n)


def bilaplacian_symbol(geom: GeometryConfig) -> np.ndarray:
    lap, _, _ = _symbols(geom.grid_n, geom.period)
    return lap**2


def gradient_values(values: np.ndarray, geom: GeometryConfig):
    _, kx, ky = _symbols(geom.grid_n, geom.period)
    c = _fft(values)
    n = geom.grid_n
    return _ifft(1j * kx * c, n), _ifft(1j * ky * c, n)


def _require_torus(phi: PotentialField):
    if phi.geometry.backend != "torus":
        raise ValueError("operation is defined on the torus backend only")


def laplacian(phi: PotentialField) -> PotentialField:
    _require_torus(phi)
    return phi.with_values(laplacian_values(phi.values, phi.geometry))


def density(phi: PotentialField, kahler_floor: float | None = None) -> MetricDensity:
    """Metric density ``u = 1 + Delta phi``; raises NotKahler below the floor."""
    _require_torus(phi)
    floor = phi.geometry.kahler_floor if kahler_floor is None else kahler_floor
    u = 1.0 + laplacian_values(phi.values, phi.geometry)
    m = MetricDensity(u)
    if not np.isfinite(m.min_u) or m.min_u <= floor:
        raise NotKahler(m.min_u, floor)
    return m


def energy_density(phi: PotentialField) -> np.ndarray:
    """Harmonic-map energy density ``e = Delta phi + n`` of the identity map."""
    _require_torus(phi)
    return laplacian_values(phi.values, phi.geometry) + phi.geometry.n


def log_density(phi: PotentialField) -> np.ndarray:
    return np.log(density(phi).values)


def _curvature_from_density(u: np.ndarray, geom: GeometryConfig) -> np.ndarray:
    return -laplacian_values(np.log(u), geom) / u


def scalar_curvature_chart(phi: PotentialField) -> np.ndarray:
    """``S = -u^{-1} Delta log u``, the trace of Ric(omega_phi) against omega_phi."""
    u = density(phi).values
    return _curvature_from_density(u, phi.geometry)


def integrate(field, geom: GeometryConfig, measure: str = "omega", u=None) -> float:
    """Equal-weight periodic quadrature of ``field`` against omega or omega_phi.

    For ``measure="omega_phi"`` pass the metric density as ``u`` (array or
    MetricDensity).
    """
    vals = np.asarray(field, dtype=float)
    if measure == "omega_phi":
        if u is None:
            raise ValueError("measure omega_phi needs the metric density u")
        vals = vals * np.asarray(getattr(u, "values", u), dtype=float)
    elif measure != "omega":
        raise ValueError(f"unknown measure {measure!r}")
    return float(np.sum(vals) * cell_area(geom))


def gradient_energy(phi: PotentialField) -> float:
    """``int |d phi|^2_omega omega`` evaluated by Parseval on the Fourier side.

    With the normalisation of Delta used here ``|d phi|^2 = |grad phi|^2 / 2``.
    """
    _require_torus(phi)
    geom = phi.geometry
    n = geom.grid_n
    lap, _, _ = _symbols(n, geom.period)
    c = _fft(phi.values)
    # rfft halves the spectrum: double every column except y-frequency 0 and Nyquist
    mult = np.full(c.shape, 2.0)
    mult[:, 0] = 1.0
    mult[:, -1] = 1.0
    total = np.sum(mult * (-lap) * np.abs(c) ** 2)
    return float(total * cell_area(geom) / n**2)


def mean_against_omega(values: np.ndarray, geom: GeometryConfig) -> float:
    """Mean of a grid field, read off the zero Fourier mode."""
    return float(np.fft.rfft2(values)[0, 0].real / geom.grid_n**2)


def sample(phi: PotentialField) -> MetricSample:
    geom = phi.geometry
    u = density(phi).values
    s = _curvature_from_density(u, geom)
    w = np.full(geom.shape, cell_area(geom))
    return MetricSample(u=u, scalar=s, potential=phi.values, weights=w)
