"""Finite-difference backend.

Every derivative in the package goes through :func:`partial_derivative` or
:func:`second_partial`.  Functions may be vectorised over leading batch axes
of the point argument; the derivative axis is inserted right after them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainViolationError, NumericalError

SCHEMES = ("central2", "central4", "richardson")


@dataclass(frozen=True)
class DifferentiationConfig:
    """Stencil choice for finite differences.

    ``step`` is used for first derivatives of closed-form point functions.
    ``outer_step`` is used whenever the function being differentiated is
    itself built from first differences (second derivatives, divergence of a
    stress field, curvature), where a step of 1e-5 would lose ~6 digits to
    cancellation.
    """

    scheme: str = "central2"
    step: float = 1e-5
    outer_step: float = 2e-4

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown differentiation scheme {self.scheme!r}")
        if not (self.step > 0 and self.outer_step > 0):
            raise ConfigError("finite-difference steps must be positive")

    def outer(self) -> "DifferentiationConfig":
        return replace(self, step=self.outer_step)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "step": self.step, "outer_step": self.outer_step}


DEFAULT_CONFIG = DifferentiationConfig()


def tolerance(cfg: DifferentiationConfig, C: float = 1.0) -> float:
    """Identity-check tolerance tied to the stencil: max(1e-6, C h^2)."""
    return max(1e-6, C * cfg.step**2)


def _evaluate(f, q, contains):
    if contains is not None:
        inside = np.asarray(contains(q))
        if not np.all(inside):
            bad = np.asarray(q)[~inside] if inside.ndim else np.asarray(q)
            raise DomainViolationError(f"stencil point outside chart domain: {np.atleast_2d(bad)[0]}")
    val = np.asarray(f(q), dtype=float)
    if not np.all(np.isfinite(val)):
        raise NumericalError(f"non-finite function value at stencil point {np.asarray(q).reshape(-1, q.shape[-1])[0]}")
    return val


def _central(f, p, i, h, contains, order):
    e = np.zeros(p.shape[-1])
    e[i] = h
    if order == 2:
        return (_evaluate(f, p + e, contains) - _evaluate(f, p - e, contains)) / (2 * h)
    return (
        -_evaluate(f, p + 2 * e, contains)
        + 8 * _evaluate(f, p + e, contains)
        - 8 * _evaluate(f, p - e, contains)
        + _evaluate(f, p - 2 * e, contains)
    ) / (12 * h)


def partial_derivative(
    f: Callable,
    p,
    i: int,
    cfg: DifferentiationConfig = DEFAULT_CONFIG,
    contains: Optional[Callable] = None,
) -> np.ndarray:
    """Return df/dx^i at ``p`` (or at each point of a batch ``p``)."""
    p = np.asarray(p, dtype=float)
    h = cfg.step
    if cfg.scheme == "central2":
        return _central(f, p, i, h, contains, 2)
    if cfg.scheme == "central4":
        return _central(f, p, i, h, contains, 4)
    coarse = _central(f, p, i, h, contains, 2)
    fine = _central(f, p, i, h / 2, contains, 2)
    return fine + (fine - coarse) / 3.0


def gradient(f, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, contains=None) -> np.ndarray:
    """All partial derivatives, derivative axis placed after the batch axes."""
    p = np.asarray(p, dtype=float)
    parts = [partial_derivative(f, p, i, cfg, contains) for i in range(p.shape[-1])]
    return np.stack(parts, axis=p.ndim - 1)


def second_partial(f, p, i: int, j: int, cfg: DifferentiationConfig = DEFAULT_CONFIG, contains=None) -> np.ndarray:
    """d^2 f / dx^i dx^j by nesting first differences at ``cfg.outer_step``."""
    c = cfg.outer()
    return partial_derivative(lambda q: partial_derivative(f, q, j, c, contains), p, i, c, contains)


def hessian(f, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, contains=None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    rows = []
    for i in range(n):
        rows.append(np.stack([second_partial(f, p, i, j, cfg, contains) for j in range(n)], axis=p.ndim - 1))
    return np.stack(rows, axis=p.ndim - 1)
