"""Rotationally symmetric models with a pole and Hessian comparison.

A model is g = dr^2 + psi(r)^2 g_{S^{2m-1}}, realised in normal coordinates
x = r theta, where g_ij = theta_i theta_j + (psi(r)/r)^2 (delta_ij - theta_i theta_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BPoly, PPoly

from .charts import Chart, PolarStructure
from .differentiation import DEFAULT_CONFIG, DifferentiationConfig
from .errors import ConfigError, DomainViolationError
from .geometry import local_geometry

CASES = ("i", "ii", "iii", "iv", "v")
ODE_STEP = 1e-3


def curvature_profile(case: str, params: dict) -> Callable:
    """Radial curvature K(r) that saturates the case's bound."""
    if case == "i":
        return lambda r: np.zeros_like(np.asarray(r, dtype=float))
    if case == "ii":
        b2 = params["b"] ** 2
        return lambda r: b2 / (1 + np.asarray(r) ** 2)
    if case == "iii":
        B, eps = params["B"], params["eps"]
        return lambda r: B / (1 + np.asarray(r) ** 2) ** (1 + eps)
    if case == "iv":
        beta = params["beta"]
        return lambda r: -beta**2 + 0 * np.asarray(r)
    if case == "v":
        a = params["a"]
        return lambda r: -(a**2) / (1 + np.asarray(r) ** 2)
    raise ConfigError(f"unknown curvature case {case!r}")


def case_lower_bound(case: str, params: dict, r):
    """Lower bound h(r) on the non-radial eigenvalues of Hess r for each case."""
    r = np.asarray(r, dtype=float)
    if case == "i":
        return 1.0 / r
    if case == "ii":
        return (1 + sqrt(1 - 4 * params["b"] ** 2)) / (2 * r)
    if case == "iii":
        return (1 - params["B"] / (2 * params["eps"])) / r
    if case == "iv":
        beta = params["beta"]
        return beta / np.tanh(beta * r)
    if case == "v":
        A = power_exponent(params["a"])
        return np.maximum(A / (1 + r), 1.0 / r)
    raise ConfigError(f"unknown curvature case {case!r}")


def power_exponent(a: float) -> float:
    return (1 + sqrt(1 + 4 * a * a)) / 2


def validate_case_params(case: str, params: dict) -> None:
    if case == "ii" and not 0 <= params["b"] ** 2 <= 0.25:
        raise ConfigError("case ii needs b^2 in [0, 1/4]")
    if case == "iii" and not (params["eps"] > 0 and 0 <= params["B"] < 2 * params["eps"]):
        raise ConfigError("case iii needs eps > 0 and 0 <= B < 2 eps")
    if case == "iv" and not params["beta"] > 0:
        raise ConfigError("case iv needs beta > 0")
    if case == "v" and not params["a"] > 0:
        raise ConfigError("case v needs a > 0")


def integrate_warping(K: Callable, r_max: float, step: float = ODE_STEP):
    """Classical RK4 for psi'' = -K psi, psi(0) = 0, psi'(0) = 1.

    Returns knot radii and (psi, psi', psi'') at every knot."""
    n = int(np.ceil(r_max / step))
    r = np.linspace(0.0, n * step, n + 1)
    h = r[1] - r[0]
    y = np.empty((n + 1, 2))
    y[0] = (0.0, 1.0)

    def rhs(t, v):
        return np.array([v[1], -K(t) * v[0]])

    for k in range(n):
        t, v = r[k], y[k]
        k1 = rhs(t, v)
        k2 = rhs(t + h / 2, v + h / 2 * k1)
        k3 = rhs(t + h / 2, v + h / 2 * k2)
        k4 = rhs(t + h, v + h * k3)
        y[k + 1] = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    psi2 = -K(r) * y[:, 0]
    return r, np.column_stack([y, psi2])


class Warping:
    """C^2 warping function psi with psi(r)/r evaluated smoothly through r = 0."""

    def __init__(self, psi=None, dpsi=None, d2psi=None, ratio=None, K: Optional[Callable] = None, r_max: float = 6.0):
        if psi is not None:
            self._psi, self._dpsi, self._d2psi, self._ratio = psi, dpsi, d2psi, ratio
            return
        knots, table = integrate_warping(K, r_max)
        bp = BPoly.from_derivatives(knots, table)
        self._pp = PPoly.from_bernstein_basis(bp)
        self._d1 = self._pp.derivative()
        self._d2 = self._pp.derivative(2)
        # first cell: psi(r) = sum c_k r^k with c_0 = 0, so psi(r)/r is polynomial
        first = self._pp.c[:, 0]
        self._first_ratio = np.poly1d(first[:-1])
        self._first_edge = knots[1]
        self.r_max = knots[-1]
        self._psi = self._pp
        self._dpsi = self._d1
        self._d2psi = self._d2
        self._ratio = self._table_ratio

    def _table_ratio(self, r):
        r = np.asarray(r, dtype=float)
        safe = np.where(r < self._first_edge, 1.0, r)
        return np.where(r < self._first_edge, self._first_ratio(r), self._pp(safe) / safe)

    def psi(self, r):
        return self._psi(np.asarray(r, dtype=float))

    def dpsi(self, r):
        return self._dpsi(np.asarray(r, dtype=float))

    def d2psi(self, r):
        return self._d2psi(np.asarray(r, dtype=float))

    def ratio(self, r):
        """psi(r) / r, equal to 1 at the pole."""
        return self._ratio(np.asarray(r, dtype=float))


def _sinhc(beta):
    def ratio(r):
        r = np.asarray(r, dtype=float)
        z = beta * r
        small = np.abs(z) < 1e-4
        zs = np.where(small, 1.0, z)
        return np.where(small, 1 + z * z / 6 + z**4 / 120, np.sinh(zs) / zs)

    return ratio


def closed_form_warping(case: str, params: dict) -> Optional[Warping]:
    if case == "i":
        return Warping(
            psi=lambda r: r, dpsi=lambda r: np.ones_like(r), d2psi=lambda r: np.zeros_like(r), ratio=lambda r: np.ones_like(r)
        )
    if case == "iv":
        b = params["beta"]
        return Warping(
            psi=lambda r: np.sinh(b * r) / b,
            dpsi=lambda r: np.cosh(b * r),
            d2psi=lambda r: b * np.sinh(b * r),
            ratio=_sinhc(b),
        )
    return None


def compatible_acs(g: np.ndarray, J0: np.ndarray) -> np.ndarray:
    """Polar retraction of J0 onto g-orthogonal almost complex structures.

    Skew-symmetrise J0 with respect to g, then normalise by (-A^2)^{-1/2}.
    Works on batches of matrices."""
    w, U = np.linalg.eigh(g)
    sq = np.einsum("...ij,...j,...kj->...ik", U, np.sqrt(w), U)
    isq = np.einsum("...ij,...j,...kj->...ik", U, 1 / np.sqrt(w), U)
    B = sq @ J0 @ isq
    B = 0.5 * (B - np.swapaxes(B, -1, -2))
    P = np.swapaxes(B, -1, -2) @ B
    pw, pU = np.linalg.eigh(P)
    pinv = np.einsum("...ij,...j,...kj->...ik", pU, 1 / np.sqrt(pw), pU)
    return isq @ (B @ pinv) @ sq


def standard_acs(m: int) -> np.ndarray:
    """Constant J0 on coordinates (x1, y1, ..., xm, ym): J d/dx = d/dy."""
    J = np.zeros((2 * m, 2 * m))
    for a in range(m):
        J[2 * a + 1, 2 * a] = 1.0
        J[2 * a, 2 * a + 1] = -1.0
    return J


@dataclass(eq=False)
class RadialModel:
    m: int
    case_tag: str
    params: dict
    warping: Warping
    curvature: Callable
    chart: Chart = field(init=False)
    r_max: float = 6.0

    def __post_init__(self):
        validate_case_params(self.case_tag, self.params)
        n = 2 * self.m
        J0 = standard_acs(self.m)
        w = self.warping
        r_lim = self.r_max

        def metric(x):
            x = np.asarray(x, dtype=float)
            r = np.linalg.norm(x, axis=-1)
            safe = np.where(r > 0, r, 1.0)
            theta = x / safe[..., None]
            radial = np.einsum("...i,...j->...ij", theta, theta)
            c2 = w.ratio(r) ** 2
            return radial + c2[..., None, None] * (np.eye(n) - radial)

        def acs(x):
            g = metric(x)
            return compatible_acs(g, np.broadcast_to(J0, g.shape))

        self.chart = Chart(
            name=f"warped_{self.case_tag}",
            dim_half=self.m,
            metric=metric,
            acs=acs,
            contains=lambda x: np.linalg.norm(np.asarray(x), axis=-1) < r_lim,
            polar=PolarStructure(
                distance=lambda x: np.linalg.norm(np.asarray(x), axis=-1),
                to_chart_radius=lambda s: s,
                density=lambda s: w.psi(s) ** (n - 1),
            ),
            params={"case": self.case_tag, **self.params, "sample_radius": min(3.0, 0.5 * r_lim)},
        )

    @property
    def pole(self) -> np.ndarray:
        return np.zeros(2 * self.m)

    def nonradial_eigenvalue(self, r):
        return self.warping.dpsi(r) / self.warping.psi(r)


def build_radial_model(m: int, case: str, params: Optional[dict] = None, r_max: float = 6.0) -> RadialModel:
    params = dict(params or {})
    validate_case_params(case, params)
    K = curvature_profile(case, params)
    warping = closed_form_warping(case, params) or Warping(K=K, r_max=r_max + 0.5)
    return RadialModel(m=m, case_tag=case, params=params, warping=warping, curvature=K, r_max=r_max)


DEFAULT_CASE_PARAMS = {
    "i": {},
    "ii": {"b": 0.5},
    "iii": {"B": 1.0, "eps": 1.0},
    "iv": {"beta": 1.0},
    "v": {"a": 1.0},
}


# -- Hessian comparison ---------------------------------------------------------


def _radial_point(model: RadialModel, r: float, direction=None) -> np.ndarray:
    n = 2 * model.m
    d = np.ones(n) / np.sqrt(n) if direction is None else np.asarray(direction, float) / np.linalg.norm(direction)
    return r * d


def hess_r(model: RadialModel, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Hess r = d^2 r - Gamma^k_ij d_k r assembled covariantly in normal coordinates."""
    p = model.chart.check_point(p)
    r = np.linalg.norm(p)
    if r < 1e-8:
        raise DomainViolationError("Hess r is singular at the pole")
    theta = p / r
    n = p.size
    d2r = (np.eye(n) - np.outer(theta, theta)) / r
    G = local_geometry(model.chart, p, cfg).gamma
    return d2r - np.einsum("kij,k->ij", G, theta)


def hess_r_closed_form(model: RadialModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    g = model.chart.metric_at(p)
    dr = p / r  # covector components of dr in normal coordinates
    return model.nonradial_eigenvalue(r) * (g - np.outer(dr, dr))


def metric_eigenvalues(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of the symmetric bilinear form H relative to g."""
    from scipy.linalg import eigh

    return eigh(0.5 * (H + H.T), g, eigvals_only=True)


@dataclass
class ComparisonRow:
    r: float
    nonradial_min: float
    bound: float
    margin: float
    closed_form_residual: float


def comparison_check(model: RadialModel, radii, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> list[ComparisonRow]:
    """Margins of min non-radial Hess r eigenvalue over the case's lower bound."""
    validate_case_params(model.case_tag, model.params)
    rows = []
    for r in radii:
        p = _radial_point(model, r)
        H = hess_r(model, p, cfg)
        g = model.chart.metric_at(p)
        ev = metric_eigenvalues(H, g)
        nonradial = ev[1:]  # the radial eigenvalue 0 is the smallest
        bound = float(case_lower_bound(model.case_tag, model.params, r))
        closed = hess_r_closed_form(model, p)
        rows.append(
            ComparisonRow(
                r=float(r),
                nonradial_min=float(nonradial.min()),
                bound=bound,
                margin=float(nonradial.min() - bound),
                closed_form_residual=float(np.max(np.abs(H - closed))),
            )
        )
    return rows


def riccati_residual(model: RadialModel, radii) -> float:
    """max |(-psi''/psi) - K| over the radii."""
    r = np.asarray(radii, dtype=float)
    w = model.warping
    return float(np.max(np.abs(-w.d2psi(r) / w.psi(r) - model.curvature(r))))


# -- weight functions and eigenvalue pair sums -------------------------------------


@dataclass(frozen=True)
class WeightFunction:
    kind: str  # half_r_squared | cosh_beta_r | power_A
    beta: float = 1.0
    A: float = 1.0

    def d1(self, r):
        if self.kind == "half_r_squared":
            return r
        if self.kind == "cosh_beta_r":
            return self.beta * np.sinh(self.beta * r)
        return (1 + r) ** self.A

    def d2(self, r):
        if self.kind == "half_r_squared":
            return 1.0 + 0 * r
        if self.kind == "cosh_beta_r":
            return self.beta**2 * np.cosh(self.beta * r)
        return self.A * (1 + r) ** (self.A - 1)


def pair_sum(eigs: np.ndarray, m: int) -> float:
    """sum_{i=1}^{m-1} (lambda_i + lambda_{m+i}) for sorted eigenvalues."""
    e = np.sort(eigs)
    return float(sum(e[i] + e[m + i] for i in range(m - 1)))


def convex_weight_branch(f1: float, f2: float, h: float, m: int) -> float:
    if f1 * h >= f2:
        return f2 + (2 * m - 3) * f1 * h
    return 2 * (m - 1) * f1 * h


def weight_bound(model: RadialModel, weight: WeightFunction, r: float, D: Optional[float] = None) -> float:
    m = model.m
    if weight.kind == "half_r_squared":
        return D if D is not None else half_r_squared_constant(model.case_tag, model.params, m)
    if weight.kind == "cosh_beta_r":
        return 2 * (m - 1) * weight.beta**2 * np.cosh(weight.beta * r)
    A = weight.A
    return max(2 * (m - 1) * A * (1 + r) ** (A - 1), A * (1 + r) ** (A - 1) + (2 * m - 3) * (1 + r) ** A / r)


def half_r_squared_constant(case: str, params: dict, m: int, variant: str = "lemma") -> float:
    """Constant bounding the pair sum of Hess r^2/2 in cases i-iii.

    ``variant='lemma'`` uses (m-1)(1+sqrt(1-4b^2)) in case ii; ``'theorem'``
    uses the smaller (m-1)(1-sqrt(1-4b^2))."""
    if case == "i":
        return 2.0 * (m - 1)
    if case == "ii":
        s = sqrt(1 - 4 * params["b"] ** 2)
        return (m - 1) * (1 + s) if variant == "lemma" else (m - 1) * (1 - s)
    if case == "iii":
        return 2.0 * (m - 1) * (1 - params["B"] / (2 * params["eps"]))
    raise ConfigError(f"r^2/2 weight is only used in cases i-iii, not {case!r}")


def eigen_pair_sum(model: RadialModel, weight: WeightFunction, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, D=None):
    """Pair sum of the spectrum of Hess f(r) and the corresponding lower bound."""
    p = model.chart.check_point(p)
    r = float(np.linalg.norm(p))
    theta = p / r
    H = weight.d2(r) * np.outer(theta, theta) + weight.d1(r) * hess_r(model, p, cfg)
    eigs = metric_eigenvalues(H, model.chart.metric_at(p))
    return pair_sum(eigs, model.m), float(weight_bound(model, weight, r, D)), eigs
