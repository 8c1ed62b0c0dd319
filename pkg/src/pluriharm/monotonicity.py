"""Weighted partial energies over geodesic balls and annuli, monotone ratio
curves and the growth diagnostics that force holomorphicity."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .charts import Chart
from .differentiation import DEFAULT_CONFIG, DifferentiationConfig
from .errors import ConfigError, ResolutionError
from .maps import SmoothMap, defect_tensor, energy_densities, jet
from .quadrature import QuadratureRule, ball_quadrature, sphere_area, sphere_quadrature
from .radial import power_exponent

CASE_TAGS = ("i", "ii", "iii", "iv", "v", "iv_annulus", "v_annulus")
CURVE_COLUMNS = ("r", "weighted_integral", "normalizer", "ratio", "boundary_integral", "margin")


def annulus_constant(A: float, R0: float, m: int) -> float:
    """C(R0): 2(m-1)A when A R0/(1+R0) >= 1, else A + (2m-3)(1 + 1/R0)."""
    if A * R0 / (1 + R0) >= 1:
        return 2 * (m - 1) * A
    return A + (2 * m - 3) * (1 + 1 / R0)


@dataclass
class MonotonicityCase:
    """Case tag plus the constants of the corresponding monotonicity statement.

    ``D`` and ``C`` are the curvature constant and the |V| constant (C1, C2,
    C3, C2' or C3' depending on the tag); ``beta`` and ``a`` come from the
    curvature hypothesis, ``R0`` is the excised radius for annulus tags."""

    case_tag: str
    m: int = 2
    D: Optional[float] = None
    C: float = 0.0
    beta: float = 1.0
    a: float = 1.0
    R0: float = 0.0

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ConfigError(f"unknown case {self.case_tag!r}; expected one of {CASE_TAGS}")
        if self.case_tag in ("i", "ii", "iii"):
            if self.D is None:
                self.D = 2.0 * (self.m - 1)
            if not self.lam > 0:
                raise ConfigError(f"lambda = D - 2C must be positive, got {self.lam}")
        elif self.case_tag.startswith("iv"):
            if self.beta <= 0:
                raise ConfigError("beta must be positive")
            if not self.C < (self.m - 1) * self.beta:
                raise ConfigError(f"C2 must be below (m-1) beta = {(self.m - 1) * self.beta}")
        else:
            if self.a <= 0:
                raise ConfigError("a must be positive")
            bound = self.annulus_C / 2 if self.case_tag == "v_annulus" else (self.m - 1) * self.A
            if not self.C < bound:
                raise ConfigError(f"C3 must be below {bound}")
        if self.annulus and self.R0 <= 0:
            raise ConfigError("annulus cases need R0 > 0")

    @property
    def annulus(self) -> bool:
        return self.case_tag.endswith("annulus")

    @property
    def A(self) -> float:
        return power_exponent(self.a)

    @property
    def annulus_C(self) -> float:
        return annulus_constant(self.A, self.R0, self.m)

    @property
    def lam(self) -> float:
        return self.D - 2 * self.C

    @property
    def inner_radius(self) -> float:
        return self.R0 if self.annulus else 0.0

    def weight(self, r):
        r = np.asarray(r, dtype=float)
        if self.case_tag.startswith("iv"):
            return np.cosh(self.beta * r)
        if self.case_tag.startswith("v"):
            return (1 + r) ** (self.A - 1)
        return np.ones_like(r)

    def exponent(self) -> float:
        m = self.m
        if self.case_tag in ("i", "ii", "iii"):
            return self.lam
        if self.case_tag.startswith("iv"):
            return 2 * (m - 1) - 2 * self.C / self.beta
        if self.case_tag == "v":
            return 2 * (m - 1) * self.A - 2 * self.C
        return self.annulus_C - 2 * self.C

    def normalizer(self, r) -> float:
        k = self.exponent()
        if self.case_tag in ("i", "ii", "iii"):
            return r**k
        if self.case_tag.startswith("iv"):
            return np.sinh(self.beta * r) ** k
        return (1 + r) ** k

    def boundary_factor(self, r) -> float:
        """Factor multiplying the boundary integral in the differential inequality."""
        if self.case_tag in ("i", "ii", "iii"):
            return r
        if self.case_tag.startswith("iv"):
            return np.sinh(self.beta * r)
        return (1 + r) ** self.A

    def volume_factor(self) -> float:
        """Factor multiplying the weighted integral in the differential inequality."""
        if self.case_tag in ("i", "ii", "iii"):
            return self.lam
        if self.case_tag.startswith("iv"):
            return 2 * (self.m - 1) * self.beta - 2 * self.C
        return self.exponent()

    def growth_rate(self) -> float:
        """Critical growth exponent of the raw energy in the vanishing theorems."""
        m = self.m
        if self.case_tag in ("i", "ii", "iii"):
            return self.lam
        if self.case_tag.startswith("iv"):
            return (2 * m - 3) * self.beta - 2 * self.C
        return (2 * m - 3) * self.A + 1 - 2 * self.C

    def to_dict(self) -> dict:
        return {**asdict(self), "lambda": self.lam if self.D is not None else None, "exponent": self.exponent()}


@dataclass
class MonotonicityCurve:
    radii: np.ndarray
    weighted_integrals: np.ndarray
    normalizers: np.ndarray
    ratios: np.ndarray
    boundary_integrals: np.ndarray
    margins: np.ndarray
    case: MonotonicityCase
    raw_energies: Optional[np.ndarray] = None
    hypotheses: dict = field(default_factory=dict)
    rule: Optional[dict] = None

    def __post_init__(self):
        if np.any(np.diff(self.radii) <= 0):
            raise ConfigError("radii must be strictly increasing")
        if not np.all(np.isfinite(self.ratios)):
            raise ConfigError("non-finite ratio in curve")

    @property
    def certified(self) -> bool:
        return bool(self.hypotheses.get("certified", False))

    def monotonicity_violation(self) -> float:
        """Most negative consecutive ratio increment, scaled by max(|ratio|, 1)."""
        if len(self.ratios) < 2:
            return 0.0
        scale = np.maximum(np.abs(self.ratios[1:]), 1.0)
        return float(min(0.0, np.min(np.diff(self.ratios) / scale)))

    def rows(self):
        return [
            dict(zip(CURVE_COLUMNS, map(float, vals)))
            for vals in zip(self.radii, self.weighted_integrals, self.normalizers, self.ratios, self.boundary_integrals, self.margins)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for row in self.rows():
            w.writerow([repr(row[c]) for c in CURVE_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "case": self.case.to_dict(),
            "rows": self.rows(),
            "raw_energies": None if self.raw_energies is None else [float(x) for x in self.raw_energies],
            "hypotheses": self.hypotheses,
            "rule": self.rule,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# -- integrals -------------------------------------------------------------------------


def _polar(model: Chart):
    if model.polar is None:
        raise ConfigError(f"{model.name} has no geodesic polar structure about a pole")
    return model.polar


def _pole(model: Chart) -> np.ndarray:
    return np.zeros(model.dim)


def _integrand(u: SmoothMap, model: Chart, weights):
    polar = _polar(model)

    def f(x):
        r = polar.distance(x)
        e = energy_densities(u, x)[2]
        return np.stack([w(r) * e for w in weights], axis=-1)

    return f


def _shell(u, model, weights, a, b, rule) -> np.ndarray:
    """Shell integrals a < r < b of w(r(x)) |delbar u|^2 for each weight, sharing one evaluation."""
    polar = _polar(model)
    return np.asarray(
        ball_quadrature(
            _integrand(u, model, weights), _pole(model), b, rule,
            radial_jacobian=polar.density, radial_map=polar.to_chart_radius, inner_radius=a,
        ),
        dtype=float,
    )


def _unit_weight(r):
    return np.ones_like(np.asarray(r, dtype=float))


def weighted_partial_energy(
    u: SmoothMap, model: Chart, r: float, case: MonotonicityCase, rule: QuadratureRule, error_budget: Optional[float] = None
) -> float:
    """Integral of weight(r(x)) |delbar u|^2 over B_r (or B_r minus B_R0 for annulus cases)."""
    inner = case.inner_radius
    if not r > inner:
        raise ConfigError(f"radius {r} must exceed {inner}")
    value = float(_shell(u, model, [case.weight], inner, r, rule)[0])
    if error_budget is not None:
        fine = rule.refined(2)
        check = float(_shell(u, model, [case.weight], inner, r, fine)[0])
        if abs(check - value) > error_budget * max(1.0, abs(check)):
            raise ResolutionError(
                f"quadrature estimate {abs(check - value):.3e} exceeds budget {error_budget:.1e}",
                {"radial_count": fine.radial_count * 2, "angle_count": fine.angle_count * 2},
            )
    return value


def boundary_integral(u: SmoothMap, model: Chart, r: float, rule: QuadratureRule) -> float:
    """Integral of |delbar u|^2 over the geodesic sphere of radius r."""
    polar = _polar(model)
    inner = sphere_quadrature(lambda x: energy_densities(u, x)[2], _pole(model), r, rule, polar.to_chart_radius)
    return float(polar.density(r) * inner)


def differential_inequality_check(u: SmoothMap, model: Chart, case: MonotonicityCase, r: float, rule: QuadratureRule, _integral=None):
    """(lhs, rhs): boundary_factor(r) * boundary integral vs volume_factor * weighted integral."""
    F = weighted_partial_energy(u, model, r, case, rule) if _integral is None else _integral
    lhs = case.boundary_factor(r) * boundary_integral(u, model, r, rule)
    rhs = case.volume_factor() * F
    return float(lhs), float(rhs)


# -- hypotheses ----------------------------------------------------------------------------


def _sample_ball(model: Chart, r_max: float, count: int, rng: np.random.Generator, inner: float = 0.0):
    polar = _polar(model)
    n = model.dim
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    s = rng.uniform(max(inner, 1e-3), r_max, size=count)
    return polar.to_chart_radius(s)[:, None] * dirs, s


def measure_hypotheses(
    u: SmoothMap, model: Chart, case: MonotonicityCase, r_max: float, samples: int = 200, seed: int = 0,
    cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6,
) -> dict:
    """Measured |V| constant for the case, the Im N_J in Ker du check, and the pluriharmonic defect."""
    rng = np.random.default_rng(seed)
    pts, s = _sample_ball(model, r_max, samples, rng, case.inner_radius)
    scaled, kernel, defect, target_nabla_J = [], 0.0, 0.0, 0.0
    for p, r in zip(pts, s):
        j = jet(u, p, cfg)
        vn = j.dom.vector_norm(j.dom.V)
        if case.case_tag in ("i", "ii", "iii"):
            scaled.append(r * vn)
        elif case.case_tag.startswith("iv"):
            scaled.append(np.tanh(case.beta * r) * vn)
        else:
            scaled.append((1 + r) * vn)
        X, Y = rng.normal(size=(2, model.dim))
        N = np.einsum("kij,i,j->k", j.dom.nijenhuis, X, Y)
        nN = j.dom.vector_norm(N)
        if nN > tol:
            kernel = max(kernel, j.tgt.vector_norm(j.jac @ N) / nN)
        defect = max(defect, float(np.max(np.abs(defect_tensor(j)))))
        target_nabla_J = max(target_nabla_J, j.tgt.norm(np.einsum("ikj->kij", j.tgt.nabla_J), covariant=2))
    measured_C = float(max(scaled)) if scaled else 0.0
    ok = measured_C <= case.C + tol and kernel <= tol and defect <= tol and target_nabla_J <= tol
    return {
        "measured_C": measured_C,
        "declared_C": case.C,
        "image_nijenhuis_in_kernel": kernel,
        "pluriharmonic_defect": defect,
        "target_nabla_J": target_nabla_J,
        "samples": samples,
        "certified": bool(ok),
    }


# -- curves ---------------------------------------------------------------------------------


def ratio_curve(
    u: SmoothMap, model: Chart, case: MonotonicityCase, radii, rule: QuadratureRule,
    hypotheses: Optional[dict] = None, raw: bool = True,
) -> MonotonicityCurve:
    """Ratios weighted_integral / normalizer at increasing radii.

    Ball integrals are accumulated shell by shell in increasing radius so
    nested balls share their inner quadrature deterministically."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise ConfigError("radii must be a non-empty strictly increasing list")
    if radii[0] <= case.inner_radius:
        raise ConfigError(f"radii must exceed {case.inner_radius}")
    weights = [case.weight, _unit_weight]
    totals = np.zeros(2)
    if raw and case.inner_radius > 0:
        totals[1] = _shell(u, model, [_unit_weight], 0.0, case.inner_radius, rule)[0]
    F, E = [], []
    prev = case.inner_radius
    for r in radii:
        totals = totals + _shell(u, model, weights, prev, r, rule)
        F.append(totals[0])
        E.append(totals[1])
        prev = r
    F = np.array(F)
    norms = np.array([case.normalizer(r) for r in radii])
    boundary = np.array([boundary_integral(u, model, r, rule) for r in radii])
    margins = np.array([case.boundary_factor(r) * b - case.volume_factor() * f for r, b, f in zip(radii, boundary, F)])
    return MonotonicityCurve(
        radii=radii,
        weighted_integrals=F,
        normalizers=norms,
        ratios=F / norms,
        boundary_integrals=boundary,
        margins=margins,
        case=case,
        raw_energies=np.array(E) if raw else None,
        hypotheses=hypotheses or {},
        rule=rule.to_dict(),
    )


@dataclass
class GrowthReport:
    case_tag: str
    fitted_rate: float
    critical_rate: float
    hypothesis_consistent: bool
    max_delbar_energy: Optional[float]
    conclusion_holds: Optional[bool]
    fit_variable: str

    def to_dict(self) -> dict:
        return asdict(self)


def growth_diagnostic(
    curve: MonotonicityCurve, case: MonotonicityCase, u: Optional[SmoothMap] = None, model: Optional[Chart] = None,
    tol: float = 1e-9, samples: int = 500, seed: int = 0, zero_energy: float = 1e-12,
) -> GrowthReport:
    """Fit the growth of the raw partial energy and compare with the vanishing theorem's threshold.

    Power cases fit log E against log r (log(1+r) for case v), case iv fits
    log E against r.  When the growth hypothesis is consistent and ``u`` is
    certified pluriharmonic, max |delbar u|^2 over samples is checked directly."""
    r = curve.radii
    if r.size < 8:
        raise ConfigError("growth diagnostic needs at least 8 radii")
    E = curve.raw_energies if curve.raw_energies is not None else curve.weighted_integrals
    exponential = case.case_tag.startswith("iv")
    if exponential:
        if r[-1] - r[0] < 1.0:
            raise ConfigError("exponential growth fit needs radii spanning at least a unit range")
        xvar, name = r, "r"
    else:
        if r[-1] / r[0] < 10.0 and not case.case_tag.startswith("v"):
            raise ConfigError("power growth fit needs radii spanning at least a decade")
        xvar, name = (np.log1p(r), "log(1+r)") if case.case_tag.startswith("v") else (np.log(r), "log r")
    crit = case.growth_rate()
    if np.all(np.abs(E) <= zero_energy):
        rate = -np.inf
        consistent = True
    else:
        good = E > 0
        rate = float(np.polyfit(xvar[good], np.log(E[good]), 1)[0])
        consistent = rate < crit
    max_e, holds = None, None
    if consistent and u is not None and model is not None and curve.certified:
        rng = np.random.default_rng(seed)
        pts, _ = _sample_ball(model, float(r[-1]), samples, rng)
        max_e = float(np.max(energy_densities(u, pts)[2]))
        holds = max_e <= tol
    return GrowthReport(case.case_tag, rate, crit, bool(consistent), max_e, holds, name)


def radial_reference_integral(density_of_r, model: Chart, r: float, weight, inner: float = 0.0) -> float:
    """1D adaptive quadrature of a radial integrand: area(S) * int weight * e * density ds."""
    from scipy.integrate import quad

    polar = _polar(model)
    val, _ = quad(lambda s: weight(s) * density_of_r(s) * polar.density(s), inner, r, epsabs=1e-13, epsrel=1e-12, limit=200)
    return sphere_area(model.dim) * val
