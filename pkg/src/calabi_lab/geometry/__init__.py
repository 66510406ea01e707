"""Discrete geometry for the torus chart and the toric P^1 backends."""

import numpy as np

from . import toric, torus
from .toric import abreu_scalar_curvature
from .torus import (
    density,
    energy_density,
    gradient_energy,
    grid,
    integrate,
    laplacian,
    log_density,
    scalar_curvature_chart,
)
from .types import (
    KAHLER_FLOOR,
    GeometryConfig,
    MetricDensity,
    MetricSample,
    PotentialField,
    ToricPotential,
)


def sample(field) -> MetricSample:
    """Metric data of a torus or toric field on its own quadrature nodes."""
    if isinstance(field, ToricPotential):
        return toric.sample(field)
    return torus.sample(field)


def zero_field(geom: GeometryConfig):
    if geom.backend == "toric":
        return ToricPotential(np.zeros(geom.shape), geom)
    return PotentialField(np.zeros(geom.shape), geom)


__all__ = [
    "KAHLER_FLOOR",
    "GeometryConfig",
    "MetricDensity",
    "MetricSample",
    "PotentialField",
    "ToricPotential",
    "abreu_scalar_curvature",
    "density",
    "energy_density",
    "gradient_energy",
    "grid",
    "integrate",
    "laplacian",
    "log_density",
    "sample",
    "scalar_curvature_chart",
    "toric",
    "torus",
    "zero_field",
]
