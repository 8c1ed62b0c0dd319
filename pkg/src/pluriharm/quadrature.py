"""Gauss-Legendre ball and sphere quadrature in polar coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gamma, pi

import numpy as np

from .errors import ConfigError, NumericalError


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2 * pi ** (n / 2) / gamma(n / 2)


@dataclass(frozen=True)
class QuadratureRule:
    """Product rule: Gauss-Legendre in the radius times a product
    Gauss-Legendre rule in the hyperspherical angles of S^{n-1}."""

    dim: int
    radial_count: int = 32
    angle_count: int = 24

    def __post_init__(self):
        if self.dim < 2 or self.radial_count < 1 or self.angle_count < 1:
            raise ConfigError("quadrature rule needs dim >= 2 and positive node counts")

    def radial_nodes(self, a: float, b: float):
        x, w = np.polynomial.legendre.leggauss(self.radial_count)
        return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w

    @cached_property
    def _sphere(self):
        n = self.dim
        x, w = np.polynomial.legendre.leggauss(self.angle_count)
        polar = 0.5 * pi * (x + 1)
        polar_w = 0.5 * pi * w
        azim = pi * (x + 1)
        azim_w = pi * w
        grids = [polar] * (n - 2) + [azim]
        wgrids = [polar_w] * (n - 2) + [azim_w]
        mesh = np.meshgrid(*grids, indexing="ij")
        wmesh = np.meshgrid(*wgrids, indexing="ij")
        angles = [a.ravel() for a in mesh]
        weight = np.ones_like(angles[0])
        for k, wk in enumerate(wmesh):
            weight = weight * wk.ravel()
        for k in range(n - 2):
            weight = weight * np.sin(angles[k]) ** (n - 2 - k)
        dirs = np.empty((angles[0].size, n))
        running = np.ones_like(angles[0])
        for k in range(n - 1):
            dirs[:, k] = running * np.cos(angles[k])
            running = running * np.sin(angles[k])
        dirs[:, n - 1] = running
        return dirs, weight

    @property
    def sphere_directions(self) -> np.ndarray:
        return self._sphere[0]

    @property
    def sphere_weights(self) -> np.ndarray:
        return self._sphere[1]

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return QuadratureRule(self.dim, self.radial_count * factor, self.angle_count * factor)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "radial_count": self.radial_count, "angle_count": self.angle_count}


def _identity(s):
    return s


def _checked(values, points):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise NumericalError(f"non-finite integrand at quadrature node {points[np.argmax(bad)]}")
    return values


def sphere_quadrature(integrand, center, radius: float, rule: QuadratureRule, radial_map=_identity) -> np.ndarray:
    """Integral of ``integrand`` over the unit sphere of directions at
    coordinate radius ``radial_map(radius)`` (round measure, no area factor)."""
    center = np.asarray(center, dtype=float)
    pts = center + radial_map(radius) * rule.sphere_directions
    vals = _checked(integrand(pts), pts)
    return np.tensordot(rule.sphere_weights, vals, axes=(0, 0))


def ball_quadrature(
    integrand,
    center,
    radius: float,
    rule: QuadratureRule,
    radial_jacobian,
    radial_map=_identity,
    inner_radius: float = 0.0,
):
    """Integrate ``integrand`` over the polar shell ``inner_radius < s < radius``.

    Points are ``center + radial_map(s) * theta``; the volume element is
    ``radial_jacobian(s) ds dtheta`` with ``dtheta`` the round sphere measure.
    The radial sum runs in a fixed order so results are bit-reproducible.
    """
    if not radius > inner_radius >= 0:
        raise ConfigError(f"invalid shell [{inner_radius}, {radius}]")
    s_nodes, s_weights = rule.radial_nodes(inner_radius, radius)
    total = 0.0
    for s, ws in zip(s_nodes, s_weights):
        total = total + ws * radial_jacobian(s) * sphere_quadrature(integrand, center, s, rule, radial_map)
    return total


def euclidean_jacobian(dim: int):
    return lambda s: s ** (dim - 1)
