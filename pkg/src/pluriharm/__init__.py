"""Numerical verification toolkit for pluriharmonic maps between almost Hermitian manifolds."""

from .charts import Chart, chart_invariant_residuals, random_points
from .differentiation import DEFAULT_CONFIG, DifferentiationConfig
from .errors import (
    ClassificationInconsistencyError,
    ConfigError,
    DomainViolationError,
    IllConditionedMetricError,
    ModelConstructionError,
    NumericalError,
    PluriharmError,
    PreconditionError,
    ResolutionError,
)
from .geometry import classify, local_geometry
from .maps import ANTI_HOLOMORPHIC, GENERIC, HOLOMORPHIC, SmoothMap
from .models import MAP_SPECS, MODEL_SPECS, MapSpec, ModelSpec, build_map, build_model, get_map, get_model, get_radial_model
from .quadrature import QuadratureRule

__version__ = "0.1.0"

__all__ = [
    "Chart", "chart_invariant_residuals", "random_points",
    "DEFAULT_CONFIG", "DifferentiationConfig",
    "ClassificationInconsistencyError", "ConfigError", "DomainViolationError", "IllConditionedMetricError",
    "ModelConstructionError", "NumericalError", "PluriharmError", "PreconditionError", "ResolutionError",
    "classify", "local_geometry",
    "ANTI_HOLOMORPHIC", "GENERIC", "HOLOMORPHIC", "SmoothMap",
    "MAP_SPECS", "MODEL_SPECS", "MapSpec", "ModelSpec", "build_map", "build_model", "get_map", "get_model", "get_radial_model",
    "QuadratureRule",
]
