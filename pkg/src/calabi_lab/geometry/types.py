from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

KAHLER_FLOOR = 1e-8


@dataclass(frozen=True)
class GeometryConfig:
    """Discretization of either the flat torus chart or the toric interval.

    ``grid_n`` is the number of samples per axis on the torus and the number
    of cell-centred interior samples on the moment interval ``[0, L]``.
    """

    backend: Literal["torus", "toric"] = "torus"
    grid_n: int = 64
    period: float = 2 * math.pi
    polytope_length: float = 1.0
    n: int = 1
    kahler_floor: float = KAHLER_FLOOR

    def __post_init__(self):
        if self.backend not in ("torus", "toric"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 8 or self.grid_n % 2:
            raise ValueError(f"grid_n must be an even integer >= 8, got {self.grid_n}")
        if self.period <= 0 or self.polytope_length <= 0:
            raise ValueError("period and polytope_length must be positive")
        if self.n != 1:
            raise ValueError("only complex dimension n = 1 is supported")

    @property
    def spacing(self) -> float:
        if self.backend == "torus":
            return self.period / self.grid_n
        return self.polytope_length / self.grid_n

    @property
    def volume(self) -> float:
        """Volume of the reference Kähler form."""
        if self.backend == "torus":
            return self.period**2
        return 2 * math.pi * self.polytope_length

    @property
    def shape(self) -> tuple[int, ...]:
        if self.backend == "torus":
            return (self.grid_n, self.grid_n)
        return (self.grid_n,)

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "grid_n": int(self.grid_n),
            "period": float(self.period),
            "polytope_length": float(self.polytope_length),
        }


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Kähler potential sampled on the periodic torus grid (``values[i, j]`` at
    ``(x_i, y_j)``)."""

    values: np.ndarray
    geometry: GeometryConfig

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.geometry.shape:
            raise ValueError(f"values shape {vals.shape} != grid {self.geometry.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential has non-finite entries")
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> PotentialField:
        return PotentialField(values, self.geometry)


@dataclass(frozen=True, eq=False)
class ToricPotential:
    """Symplectic potential ``u0 + f`` on the moment interval.

    ``f`` holds the smooth part at the cell centres; the Guillemin part ``u0``
    is handled in closed form.
    """

    f: np.ndarray
    geometry: GeometryConfig

    def __post_init__(self):
        vals = np.asarray(self.f, dtype=float)
        if self.geometry.backend != "toric":
            raise ValueError("ToricPotential needs a toric geometry")
        if vals.shape != self.geometry.shape:
            raise ValueError(f"f shape {vals.shape} != grid {self.geometry.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("symplectic potential has non-finite entries")
        object.__setattr__(self, "f", vals)

    @property
    def values(self) -> np.ndarray:
        return self.f

    def with_values(self, values) -> ToricPotential:
        return ToricPotential(values, self.geometry)


@dataclass(frozen=True, eq=False)
class MetricDensity:
    """Positive ratio ``u = omega_phi / omega``."""

    values: np.ndarray
    min_u: float = field(init=False)
    max_u: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "min_u", float(np.min(self.values)))
        object.__setattr__(self, "max_u", float(np.max(self.values)))


@dataclass(frozen=True, eq=False)
class MetricSample:
    """Everything the functionals need about one metric, on one set of nodes.

    ``weights`` are quadrature weights for the reference form omega, so
    ``sum(F * weights)`` approximates ``int F omega`` and
    ``sum(F * weights * u)`` approximates ``int F omega_phi``.
    ``potential`` is the Kähler potential at the nodes.
    """

    u: np.ndarray
    scalar: np.ndarray
    potential: np.ndarray
    weights: np.ndarray

    @property
    def phi_weights(self) -> np.ndarray:
        return self.weights * self.u

    @property
    def s_hat(self) -> float:
        w = self.phi_weights
        return float(np.sum(self.scalar * w) / np.sum(w))
