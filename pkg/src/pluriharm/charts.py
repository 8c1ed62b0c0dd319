"""Coordinate charts carrying an almost Hermitian structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .differentiation import DEFAULT_CONFIG, DifferentiationConfig, gradient
from .errors import DomainViolationError, IllConditionedMetricError, NumericalError


@dataclass(frozen=True)
class PolarStructure:
    """Geodesic polar coordinates about the chart origin.

    Valid for charts whose radial lines through the origin are unit-speed
    geodesics after reparametrisation, so that the geodesic sphere of radius
    ``s`` is the coordinate sphere of radius ``to_chart_radius(s)``.
    ``density(s)`` is the Riemannian volume density in (s, unit-sphere)
    coordinates with the round-sphere measure factored out.
    """

    distance: Callable  # chart point(s) -> geodesic distance to the pole
    to_chart_radius: Callable  # s -> coordinate radius
    density: Callable  # s -> volume density


@dataclass(frozen=True, eq=False)
class Chart:
    """A single coordinate patch of an almost Hermitian manifold.

    ``metric`` and ``acs`` accept points with arbitrary leading batch axes and
    return ``(..., 2m, 2m)`` arrays.  ``acs`` holds the components J^k_j with
    the row index k.  Optional ``d_metric`` / ``d_acs`` return exact first
    derivatives with the derivative index after the batch axes.
    """

    name: str
    dim_half: int
    metric: Callable
    acs: Callable
    contains: Callable
    d_metric: Optional[Callable] = None
    d_acs: Optional[Callable] = None
    polar: Optional[PolarStructure] = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 * self.dim_half

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.dim:
            raise DomainViolationError(f"{self.name}: point has length {p.shape[-1]}, chart dimension is {self.dim}")
        if not np.all(np.isfinite(p)):
            raise NumericalError(f"{self.name}: non-finite point coordinates")
        if not np.all(self.contains(p)):
            raise DomainViolationError(f"{self.name}: point {p} outside chart domain")
        return p

    def metric_at(self, p) -> np.ndarray:
        return np.asarray(self.metric(self.check_point(p)), dtype=float)

    def acs_at(self, p) -> np.ndarray:
        return np.asarray(self.acs(self.check_point(p)), dtype=float)

    def inverse_metric(self, p) -> np.ndarray:
        g = self.metric_at(p)
        cond = np.linalg.cond(g)
        if not np.all(np.isfinite(cond)) or np.any(cond > 1e12):
            raise IllConditionedMetricError(f"{self.name}: metric condition number {np.max(cond):.3g} at {p}")
        return np.linalg.inv(g)

    def metric_derivative(self, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
        """dg[..., i, j, k] = d_i g_jk."""
        p = self.check_point(p)
        if self.d_metric is not None:
            return np.asarray(self.d_metric(p), dtype=float)
        return gradient(self.metric, p, cfg, self.contains)

    def acs_derivative(self, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
        """dJ[..., i, k, j] = d_i J^k_j."""
        p = self.check_point(p)
        if self.d_acs is not None:
            return np.asarray(self.d_acs(p), dtype=float)
        return gradient(self.acs, p, cfg, self.contains)


def chart_invariant_residuals(chart: Chart, points) -> dict:
    """Max-norm residuals of J^2 = -I, J^T g J = g, g = g^T and min eigenvalue of g."""
    pts = np.atleast_2d(chart.check_point(points))
    g = chart.metric(pts)
    J = chart.acs(pts)
    eye = np.eye(chart.dim)
    return {
        "acs_square": float(np.max(np.abs(J @ J + eye))),
        "compatibility": float(np.max(np.abs(np.swapaxes(J, -1, -2) @ g @ J - g))),
        "metric_symmetry": float(np.max(np.abs(g - np.swapaxes(g, -1, -2)))),
        "metric_min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, -1, -2))))),
    }


def random_points(chart: Chart, count: int, rng: np.random.Generator, radius: Optional[float] = None) -> np.ndarray:
    """Uniform samples from a coordinate ball, kept inside the domain.

    The ball is centred at ``params["sample_center"]`` (default origin) with
    radius ``radius`` or ``params["sample_radius"]`` (default 0.5)."""
    if radius is None:
        radius = chart.params.get("sample_radius", 0.5)
    center = np.asarray(chart.params.get("sample_center", np.zeros(chart.dim)), dtype=float)
    out = []
    while len(out) < count:
        x = rng.normal(size=chart.dim)
        x *= radius * rng.uniform() ** (1.0 / chart.dim) / np.linalg.norm(x)
        q = center + x
        if np.all(chart.contains(q)):
            out.append(q)
    return np.array(out)
