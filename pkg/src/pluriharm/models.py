"""Built-in zoo of almost Hermitian charts and maps with known properties.

Coordinates are ordered (x1, y1, ..., xm, ym) with z_a = x_a + i y_a and the
standard structure J d/dx_a = d/dy_a.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .charts import Chart, PolarStructure, chart_invariant_residuals
from .errors import ConfigError, ModelConstructionError
from .maps import ANTI_HOLOMORPHIC, GENERIC, HOLOMORPHIC, SmoothMap, split, form_norm2
from .radial import DEFAULT_CASE_PARAMS, build_radial_model, compatible_acs, standard_acs

MODEL_KINDS = ("flat_complex", "complex_hyperbolic", "hopf_type", "perturbed_acs", "pushforward", "warped_radial", "conformal_deformation")

SCHEMA_VERSION = 1


def _ball(radius, center=None):
    def contains(x):
        x = np.asarray(x, dtype=float)
        c = 0 if center is None else center
        return np.linalg.norm(x - c, axis=-1) < radius

    return contains


def _annulus(inner, outer):
    def contains(x):
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return (r > inner) & (r < outer)

    return contains


def _const(mat):
    return lambda x: np.broadcast_to(mat, np.asarray(x).shape[:-1] + mat.shape).copy()


# -- charts ---------------------------------------------------------------------


def flat_complex(m: int = 2, radius: float = 10.0) -> Chart:
    n = 2 * m
    eye = np.eye(n)
    J0 = standard_acs(m)
    return Chart(
        name=f"flat_C{m}",
        dim_half=m,
        metric=_const(eye),
        acs=_const(J0),
        contains=_ball(radius),
        d_metric=_const(np.zeros((n, n, n))),
        d_acs=_const(np.zeros((n, n, n))),
        polar=PolarStructure(
            distance=lambda x: np.linalg.norm(np.asarray(x), axis=-1),
            to_chart_radius=lambda s: s,
            density=lambda s: s ** (n - 1),
        ),
        params={"sample_radius": 1.5},
    )


def complex_hyperbolic(m: int = 2, beta: float = 1.0) -> Chart:
    """Bergman ball metric scaled so sectional curvatures lie in [-4 beta^2, -beta^2].

    g = beta^-2 [ I/(1-|x|^2) + (x x^T + Jx (Jx)^T)/(1-|x|^2)^2 ]; the distance to
    the origin is artanh(|x|)/beta and J0 is parallel."""
    n = 2 * m
    J0 = standard_acs(m)

    def metric(x):
        x = np.asarray(x, dtype=float)
        q = 1.0 - np.sum(x * x, axis=-1)
        y = x @ J0.T
        outer = np.einsum("...i,...j->...ij", x, x) + np.einsum("...i,...j->...ij", y, y)
        return (np.eye(n) / q[..., None, None] + outer / (q**2)[..., None, None]) / beta**2

    def d_metric(x):
        x = np.asarray(x, dtype=float)
        q = 1.0 - np.sum(x * x, axis=-1)
        y = x @ J0.T
        eye = np.eye(n)
        outer = np.einsum("...i,...j->...ij", x, x) + np.einsum("...i,...j->...ij", y, y)
        # d_i of x x^T + y y^T with y = J0 x, dy/dx_i = J0 e_i
        Je = J0.T  # row i is J0 e_i
        d_outer = (
            np.einsum("ia,...b->...iab", eye, x)
            + np.einsum("...a,ib->...iab", x, eye)
            + np.einsum("ia,...b->...iab", Je, y)
            + np.einsum("...a,ib->...iab", y, Je)
        )
        t1 = np.einsum("...i,ab->...iab", 2 * x / (q**2)[..., None], eye)
        t2 = np.einsum("...i,...ab->...iab", 4 * x / (q**3)[..., None], outer)
        t3 = d_outer / (q**2)[..., None, None, None]
        return (t1 + t2 + t3) / beta**2

    def density(s):
        return np.sinh(beta * s) ** (n - 1) * np.cosh(beta * s) / beta ** (n - 1)

    return Chart(
        name=f"complex_hyperbolic_C{m}",
        dim_half=m,
        metric=metric,
        acs=_const(J0),
        contains=_ball(1.0),
        d_metric=d_metric,
        d_acs=_const(np.zeros((n, n, n))),
        polar=PolarStructure(
            distance=lambda x: np.arctanh(np.linalg.norm(np.asarray(x), axis=-1)) / beta,
            to_chart_radius=lambda s: np.tanh(beta * s),
            density=density,
        ),
        params={"beta": beta, "sample_radius": 0.8},
    )


def hopf_type(m: int = 2) -> Chart:
    """g = |x|^-2 I on an annulus of C^m \\ {0} with the standard J: Hermitian, not Kaehler."""
    n = 2 * m
    J0 = standard_acs(m)

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.eye(n) / np.sum(x * x, axis=-1)[..., None, None]

    def d_metric(x):
        x = np.asarray(x, dtype=float)
        t = np.sum(x * x, axis=-1)
        return np.einsum("...i,ab->...iab", -2 * x / (t**2)[..., None], np.eye(n))

    return Chart(
        name=f"hopf_type_C{m}",
        dim_half=m,
        metric=metric,
        acs=_const(J0),
        contains=_annulus(0.2, 5.0),
        d_metric=d_metric,
        d_acs=_const(np.zeros((n, n, n))),
        params={"sample_center": np.eye(n)[0] * 1.0, "sample_radius": 0.6},
    )


def _perturbation_fields(m: int, seed: int):
    n = 2 * m
    rng = np.random.default_rng(seed)
    freq = rng.normal(size=(n, n, n)) * 0.8
    phase = rng.uniform(0, 2 * np.pi, size=(n, n))
    avec = rng.normal(size=(n, n)) * 0.5
    return freq, phase, avec


def perturbed_acs(m: int = 2, eps: float = 0.3, seed: int = 7, metric_amp: float = 0.2) -> Chart:
    """Generic non-integrable almost Hermitian structure on a ball.

    g = I + c a(x) a(x)^T with a smooth vector field a; J is the polar
    retraction of J0 + eps P(x) onto g-compatible structures."""
    n = 2 * m
    J0 = standard_acs(m)
    freq, phase, avec = _perturbation_fields(m, seed)

    def metric(x):
        x = np.asarray(x, dtype=float)
        a = np.sin(x @ avec.T + 0.3)
        return np.eye(n) + metric_amp * np.einsum("...i,...j->...ij", a, a)

    def acs(x):
        x = np.asarray(x, dtype=float)
        P = np.sin(np.einsum("abk,...k->...ab", freq, x) + phase)
        return compatible_acs(metric(x), J0 + eps * P)

    return Chart(
        name=f"perturbed_acs_C{m}",
        dim_half=m,
        metric=metric,
        acs=acs,
        contains=_ball(1.5),
        params={"eps": eps, "seed": seed, "sample_radius": 1.0},
    )


class Shear:
    """Triangular diffeomorphism with closed-form inverse, Jacobian and Hessian:
    y_k = x_k + sum_{l<k} c_kl sin(x_l)."""

    def __init__(self, n: int, amp: float = 0.3, seed: int = 11):
        rng = np.random.default_rng(seed)
        self.c = np.tril(rng.normal(size=(n, n)) * amp, -1)
        self.n = n

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x + np.sin(x) @ self.c.T

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        x = np.empty_like(y)
        for k in range(self.n):
            x[..., k] = y[..., k] - np.sin(x[..., :k]) @ self.c[k, :k]
        return x

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.eye(self.n) + self.c * np.cos(x)[..., None, :]

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        d = -self.c * np.sin(x)[..., None, :]  # (..., k, l)
        eye = np.eye(self.n)
        return np.einsum("...kl,lj->...klj", d, eye)


def pushforward(base: Chart, phi: Shear, conformal_amp: float = 0.25, name: Optional[str] = None) -> Chart:
    """Target chart carrying phi_* J and the metric e^{2 f} phi_* g.

    phi is then holomorphic from ``base`` by construction, but not an
    isometry, so its second fundamental forms are non-trivial."""

    def pulled(y):
        x = phi.inverse(y)
        D = phi.jacobian(x)
        Dinv = np.linalg.inv(D)
        return x, D, Dinv

    def acs(y):
        x, D, Dinv = pulled(y)
        return D @ base.acs(x) @ Dinv

    def metric(y):
        y = np.asarray(y, dtype=float)
        x, D, Dinv = pulled(y)
        f = conformal_amp * np.sin(y[..., 0]) * np.cos(y[..., -1])
        return np.exp(2 * f)[..., None, None] * (np.swapaxes(Dinv, -1, -2) @ base.metric(x) @ Dinv)

    return Chart(
        name=name or f"pushforward_{base.name}",
        dim_half=base.dim_half,
        metric=metric,
        acs=acs,
        contains=lambda y: base.contains(phi.inverse(y)),
        params={"base": base.name},
    )


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


def smoothstep_integral(t):
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (2.5 - 3 * t + t * t)


@dataclass(frozen=True)
class ConformalProfile:
    """phi(r) = (phi1^-3 + 3C/(2(m-1)) S(r))^(-1/3) with S' a C^2 step on [r0, r1].

    For r >= r1 this is the closed form with S(r) = r - 1 (when r0 + r1 = 2),
    so the expression 2(1-m) phi'/phi^4 equals C there; for r <= r0 phi is
    constant.  V itself is 2(1-m) phi'/phi^3 grad_g r, whose deformed norm is
    2(1-m) phi'/phi^2 = C phi^2 <= C."""

    m: int
    C: float
    phi1: float = 1.0
    r0: float = 0.9
    r1: float = 1.1

    def step(self, r):
        return smoothstep((np.asarray(r, dtype=float) - self.r0) / (self.r1 - self.r0))

    def S(self, r):
        r = np.asarray(r, dtype=float)
        w = self.r1 - self.r0
        inside = w * smoothstep_integral((r - self.r0) / w)
        return np.where(r >= self.r1, r - self.r1 + 0.5 * w, inside)

    def phi(self, r):
        k = 3 * self.C / (2 * (self.m - 1))
        return (self.phi1**-3 + k * self.S(r)) ** (-1.0 / 3.0)

    def dphi(self, r):
        return -self.C * self.step(r) * self.phi(r) ** 4 / (2 * (self.m - 1))

    def V_vector_coefficient(self, r):
        """V = coefficient * grad_g r with coefficient 2(1-m) phi'/phi^3."""
        return 2 * (1 - self.m) * self.dphi(r) / self.phi(r) ** 3

    def V_norm(self, r):
        """|V| in the deformed metric: the coefficient times |grad_g r|_deformed = phi."""
        return 2 * (1 - self.m) * self.dphi(r) / self.phi(r) ** 2

    def stated_V_norm(self, r):
        """The expression 2(1-m) phi'/phi^4 defining the profile; differs from |V| by phi^2."""
        return 2 * (1 - self.m) * self.dphi(r) / self.phi(r) ** 4


def conformal_deformation(m: int = 2, C: float = 0.5, phi1: float = 1.0) -> Chart:
    """phi(|x|)^2 times the flat Kaehler metric (semi-Kaehler base) with the standard J."""
    if m < 2:
        raise ConfigError("the conformal example needs m >= 2")
    n = 2 * m
    prof = ConformalProfile(m, C, phi1)
    J0 = standard_acs(m)

    def metric(x):
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return (prof.phi(r) ** 2)[..., None, None] * np.eye(n)

    return Chart(
        name=f"conformal_C{m}",
        dim_half=m,
        metric=metric,
        acs=_const(J0),
        contains=_ball(8.0),
        d_acs=_const(np.zeros((n, n, n))),
        params={"C": C, "phi1": phi1, "profile": prof, "sample_radius": 3.0},
    )


# -- maps -------------------------------------------------------------------------


def _pairs(m):
    return [(2 * a, 2 * a + 1) for a in range(m)]


def linear_map(name, domain, target, A, holomorphy=GENERIC, offset=None):
    A = np.asarray(A, dtype=float)
    b = np.zeros(A.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    n_out, n_in = A.shape
    return SmoothMap(
        name=name,
        domain=domain,
        target=target,
        components=lambda x: np.asarray(x) @ A.T + b,
        exact_jacobian=lambda x: np.broadcast_to(A, np.asarray(x).shape[:-1] + A.shape).copy(),
        exact_hessian=lambda x: np.zeros(np.asarray(x).shape[:-1] + (n_out, n_in, n_in)),
        holomorphy=holomorphy,
    )


def conjugation_matrix(m):
    return np.diag([1.0, -1.0] * m)


def quadratic_map(name, domain, target, b, A, Q, holomorphy=GENERIC):
    """u(x) = b + A x + 1/2 Q[x, x] with Q symmetric in its last two indices."""
    b, A, Q = (np.asarray(v, dtype=float) for v in (b, A, Q))
    Q = 0.5 * (Q + np.swapaxes(Q, 1, 2))
    return SmoothMap(
        name=name,
        domain=domain,
        target=target,
        components=lambda x: b + np.asarray(x) @ A.T + 0.5 * np.einsum("gij,...i,...j->...g", Q, x, x),
        exact_jacobian=lambda x: A + np.einsum("gij,...j->...gi", Q, x),
        exact_hessian=lambda x: np.broadcast_to(Q, np.asarray(x).shape[:-1] + Q.shape).copy(),
        holomorphy=holomorphy,
    )


def complex_polynomial_map(name, domain, target, coeffs, conjugate_output=False, holomorphy=None):
    """Quadratic complex polynomial map C^m -> C^k written as a real map.

    ``coeffs`` is a list (one per output) of (const, lin[m], quad[m][m]) complex
    coefficients of w = c + sum lin_a z_a + sum quad_ab z_a z_b."""
    m = domain.dim_half
    k = len(coeffs)
    n_out = 2 * k
    b = np.zeros(n_out)
    A = np.zeros((n_out, 2 * m))
    Q = np.zeros((n_out, 2 * m, 2 * m))
    # real/imag parts of a complex linear form sum c_a z_a in (x, y) coordinates
    for out, (c0, lin, quad) in enumerate(coeffs):
        re, im = 2 * out, 2 * out + 1
        b[re], b[im] = np.real(c0), np.imag(c0)
        for a in range(m):
            c = complex(lin[a])
            xa, ya = 2 * a, 2 * a + 1
            A[re, xa], A[re, ya] = c.real, -c.imag
            A[im, xa], A[im, ya] = c.imag, c.real
        for a in range(m):
            for bb in range(m):
                c = complex(quad[a][bb])
                if c == 0:
                    continue
                xa, ya, xb, yb = 2 * a, 2 * a + 1, 2 * bb, 2 * bb + 1
                # c z_a z_b = c (xa xb - ya yb + i(xa yb + ya xb)); Hessian is 2x coefficient
                re_part = np.zeros((2 * m, 2 * m))
                im_part = np.zeros((2 * m, 2 * m))
                re_part[xa, xb] += 1
                re_part[ya, yb] -= 1
                im_part[xa, yb] += 1
                im_part[ya, xb] += 1
                re_part = re_part + re_part.T
                im_part = im_part + im_part.T
                Q[re] += c.real * re_part - c.imag * im_part
                Q[im] += c.imag * re_part + c.real * im_part
    if conjugate_output:
        C = conjugation_matrix(k)
        b, A, Q = C @ b, C @ A, np.einsum("gh,hij->gij", C, Q)
    cls = holomorphy or (ANTI_HOLOMORPHIC if conjugate_output else HOLOMORPHIC)
    return quadratic_map(name, domain, target, b, A, Q, cls)


def shear_map(name, domain, target, phi: Shear, holomorphy=HOLOMORPHIC):
    return SmoothMap(
        name=name,
        domain=domain,
        target=target,
        components=phi,
        exact_jacobian=phi.jacobian,
        exact_hessian=phi.hessian,
        holomorphy=holomorphy,
    )


def random_quadratic_map(name, domain, target, rng: np.random.Generator, scale=0.1, center=None):
    n_in, n_out = domain.dim, target.dim
    b = np.zeros(n_out) if center is None else np.asarray(center, dtype=float)
    A = rng.normal(size=(n_out, n_in)) * scale
    Q = rng.normal(size=(n_out, n_in, n_in)) * scale
    return quadratic_map(name, domain, target, b, A, Q, GENERIC)


# -- specs and registry ------------------------------------------------------------------


@dataclass
class ModelSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    expected_flags: dict = field(default_factory=dict)
    expected_V: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({"schema_version": SCHEMA_VERSION, **asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        data = json.loads(text)
        data.pop("schema_version", None)
        return cls(**data)


@dataclass
class MapSpec:
    name: str
    domain_model: str
    target_model: str
    holomorphy_class: str
    components: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"schema_version": SCHEMA_VERSION, **asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MapSpec":
        data = json.loads(text)
        data.pop("schema_version", None)
        return cls(**data)


ALL_TRUE = {k: True for k in ("kaehler", "almost_kaehler", "nearly_kaehler", "quasi_kaehler", "semi_kaehler", "hermitian")}
HERMITIAN_ONLY = {"kaehler": False, "hermitian": True, "almost_kaehler": False, "semi_kaehler": False}

MODEL_SPECS = {
    "flat": ModelSpec("flat", "flat_complex", {"m": 2}, ALL_TRUE, "zero"),
    "bergman": ModelSpec("bergman", "complex_hyperbolic", {"m": 2, "beta": 1.0}, ALL_TRUE, "zero"),
    "hopf": ModelSpec("hopf", "hopf_type", {"m": 2}, HERMITIAN_ONLY, "2(m-1) x"),
    "perturbed": ModelSpec("perturbed", "perturbed_acs", {"m": 2, "eps": 0.3, "seed": 7}, {"hermitian": False, "kaehler": False}),
    "perturbed_push": ModelSpec(
        "perturbed_push", "pushforward", {"base": "perturbed", "seed": 11, "amp": 0.3}, {"hermitian": False, "kaehler": False}
    ),
    "flat_push": ModelSpec("flat_push", "pushforward", {"base": "flat", "seed": 5, "amp": 0.3}, {"hermitian": True, "kaehler": False}),
    "conformal": ModelSpec(
        "conformal", "conformal_deformation", {"m": 2, "C": 0.5, "phi1": 1.0}, {"hermitian": True}, "2(1-m) phi'/phi^3 grad r"
    ),
    "warped_i": ModelSpec("warped_i", "warped_radial", {"m": 2, "case": "i"}),
    "warped_ii": ModelSpec("warped_ii", "warped_radial", {"m": 2, "case": "ii", **DEFAULT_CASE_PARAMS["ii"]}),
    "warped_iii": ModelSpec("warped_iii", "warped_radial", {"m": 2, "case": "iii", **DEFAULT_CASE_PARAMS["iii"]}),
    "warped_iv": ModelSpec("warped_iv", "warped_radial", {"m": 2, "case": "iv", **DEFAULT_CASE_PARAMS["iv"]}),
    "warped_v": ModelSpec("warped_v", "warped_radial", {"m": 2, "case": "v", **DEFAULT_CASE_PARAMS["v"]}),
}

_CACHE: dict = {}


def build_model(spec: ModelSpec, check: bool = True):
    """Chart (and RadialModel for warped kinds) for ``spec``; invariants verified."""
    key = spec.to_json()
    if key in _CACHE:
        return _CACHE[key]
    p = dict(spec.params)
    radial = None
    if spec.kind == "flat_complex":
        chart = flat_complex(p.get("m", 2))
    elif spec.kind == "complex_hyperbolic":
        beta = p.get("beta", 1.0)
        if beta <= 0:
            raise ConfigError("beta must be positive")
        chart = complex_hyperbolic(p.get("m", 2), beta)
    elif spec.kind == "hopf_type":
        chart = hopf_type(p.get("m", 2))
    elif spec.kind == "perturbed_acs":
        chart = perturbed_acs(p.get("m", 2), p.get("eps", 0.3), p.get("seed", 7))
    elif spec.kind == "pushforward":
        base = get_model(p["base"])
        phi = Shear(base.dim, p.get("amp", 0.3), p.get("seed", 11))
        chart = pushforward(base, phi, name=spec.name)
        chart.params["shear"] = phi
        chart.params["sample_radius"] = 0.6
    elif spec.kind == "conformal_deformation":
        chart = conformal_deformation(p.get("m", 2), p.get("C", 0.5), p.get("phi1", 1.0))
    elif spec.kind == "warped_radial":
        case = p.get("case", "i")
        params = {k: v for k, v in p.items() if k not in ("m", "case")}
        radial = build_radial_model(p.get("m", 2), case, params)
        chart = radial.chart
    else:
        raise ConfigError(f"unknown model kind {spec.kind!r}; expected one of {MODEL_KINDS}")
    chart = _renamed(chart, spec.name)
    if radial is not None:
        radial.chart = chart
    if check:
        _check_chart(chart)
        if spec.expected_flags:
            _check_flags(chart, spec)
    result = (chart, radial) if radial is not None else chart
    _CACHE[key] = result
    return result


def _renamed(chart: Chart, name: str) -> Chart:
    from dataclasses import replace

    return replace(chart, name=name)


def _check_chart(chart: Chart, count: int = 100, seed: int = 0):
    from .charts import random_points

    pts = random_points(chart, count, np.random.default_rng(seed))
    res = chart_invariant_residuals(chart, pts)
    if res["acs_square"] > 1e-12 or res["compatibility"] > 1e-12 or res["metric_min_eigenvalue"] <= 0:
        raise ModelConstructionError(f"{chart.name} fails chart invariants", res)


def _check_flags(chart: Chart, spec: ModelSpec):
    from .charts import random_points
    from .geometry import classify

    pts = random_points(chart, 8, np.random.default_rng(1))
    flags = classify(chart, pts).as_dict()
    wrong = {k: (flags[k], v) for k, v in spec.expected_flags.items() if flags[k] != v}
    if wrong:
        raise ModelConstructionError(f"{chart.name}: classification differs from expectation {wrong}", wrong)


def get_model(name: str) -> Chart:
    if name not in MODEL_SPECS:
        raise ConfigError(f"unknown model {name!r}; known: {sorted(MODEL_SPECS)}")
    out = build_model(MODEL_SPECS[name])
    return out[0] if isinstance(out, tuple) else out


def get_radial_model(name: str):
    out = build_model(MODEL_SPECS[name])
    if not isinstance(out, tuple):
        raise ConfigError(f"{name} is not a rotationally symmetric model")
    return out[1]


# -- map registry -------------------------------------------------------------------

MAP_KINDS = ("identity", "linear", "complex_polynomial", "shear", "random_quadratic")

_Z2 = [[0, 0], [0, 0]]

MAP_SPECS = {
    # holomorphic
    "poly_flat": MapSpec(
        "poly_flat", "flat", "flat", HOLOMORPHIC,
        {"kind": "complex_polynomial", "coeffs": [[0, [0, 0], [[1, 0], [0, 0]]], [0, [0, 0], [[0, 0.5], [0.5, 0]]]]},
    ),
    "identity_perturbed": MapSpec("identity_perturbed", "perturbed", "perturbed", HOLOMORPHIC, {"kind": "identity"}),
    "shear_perturbed": MapSpec("shear_perturbed", "perturbed", "perturbed_push", HOLOMORPHIC, {"kind": "shear"}),
    "shear_flat": MapSpec("shear_flat", "flat", "flat_push", HOLOMORPHIC, {"kind": "shear"}),
    "poly_flat_to_hopf": MapSpec(
        "poly_flat_to_hopf", "flat", "hopf", HOLOMORPHIC,
        {"kind": "complex_polynomial", "coeffs": [[2, [0, 0], [[0.3, 0], [0, 0]]], [0, [0, 0], [[0, 0.15], [0.15, 0]]]]},
    ),
    "inclusion_bergman": MapSpec("inclusion_bergman", "bergman", "flat", HOLOMORPHIC, {"kind": "identity"}),
    # anti-holomorphic
    "conj_flat": MapSpec("conj_flat", "flat", "flat", ANTI_HOLOMORPHIC, {"kind": "linear", "matrix": "conjugation"}),
    "conj_hopf": MapSpec("conj_hopf", "hopf", "flat", ANTI_HOLOMORPHIC, {"kind": "linear", "matrix": "conjugation"}),
    "conj_bergman": MapSpec("conj_bergman", "bergman", "flat", ANTI_HOLOMORPHIC, {"kind": "linear", "matrix": "conjugation"}),
    "conj_conformal": MapSpec("conj_conformal", "conformal", "flat", ANTI_HOLOMORPHIC, {"kind": "linear", "matrix": "conjugation"}),
    "conj_poly_flat": MapSpec(
        "conj_poly_flat", "flat", "flat", ANTI_HOLOMORPHIC,
        {"kind": "complex_polynomial", "conjugate": True, "coeffs": [[0, [1, 0], [[0.3, 0], [0, 0]]], [0, [0, 1], [[0, 0.1], [0.1, 0]]]]},
    ),
    "conj_poly_hopf": MapSpec(
        "conj_poly_hopf", "hopf", "bergman", ANTI_HOLOMORPHIC,
        {"kind": "complex_polynomial", "conjugate": True, "coeffs": [[0, [0.3, 0], [[0.05, 0], [0, 0]]], [0, [0, 0.3], [[0, 0.02], [0.02, 0]]]]},
    ),
    # generic
    "mixed_flat_to_bergman": MapSpec(
        "mixed_flat_to_bergman", "flat", "bergman", GENERIC, {"kind": "random_quadratic", "seed": 3, "scale": 0.08}
    ),
    "random_perturbed_to_flat": MapSpec(
        "random_perturbed_to_flat", "perturbed", "flat", GENERIC, {"kind": "random_quadratic", "seed": 4, "scale": 0.5}
    ),
}

KAEHLER_TARGETS = ("flat", "bergman")


def build_map(spec: MapSpec, check: bool = True) -> SmoothMap:
    """Construct the map described by ``spec`` and verify its declared holomorphy class."""
    dom, tgt = get_model(spec.domain_model), get_model(spec.target_model)
    c = dict(spec.components)
    kind = c.get("kind")
    if kind == "identity":
        if dom.dim != tgt.dim:
            raise ConfigError("identity map needs equal dimensions")
        u = linear_map(spec.name, dom, tgt, np.eye(dom.dim), spec.holomorphy_class)
    elif kind == "linear":
        A = conjugation_matrix(dom.dim_half) if c.get("matrix") == "conjugation" else np.asarray(c["matrix"], dtype=float)
        u = linear_map(spec.name, dom, tgt, A, spec.holomorphy_class, c.get("offset"))
    elif kind == "complex_polynomial":
        coeffs = [(complex(*_as_pair(c0)), [complex(*_as_pair(v)) for v in lin], [[complex(*_as_pair(v)) for v in row] for row in quad])
                  for c0, lin, quad in c["coeffs"]]
        u = complex_polynomial_map(spec.name, dom, tgt, coeffs, c.get("conjugate", False), spec.holomorphy_class)
    elif kind == "shear":
        phi = tgt.params.get("shear")
        if phi is None:
            raise ConfigError(f"target {tgt.name} is not a pushforward chart")
        u = shear_map(spec.name, dom, tgt, phi, spec.holomorphy_class)
    elif kind == "random_quadratic":
        u = random_quadratic_map(spec.name, dom, tgt, np.random.default_rng(c.get("seed", 0)), c.get("scale", 0.1), c.get("center"))
    else:
        raise ConfigError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")
    if dom.dim != (u.exact_jacobian(np.zeros(dom.dim)).shape[-1] if u.exact_jacobian else dom.dim):
        raise ConfigError("map dimension does not match its domain")
    if check:
        _check_holomorphy(u)
    return u


def _as_pair(v):
    """Complex numbers in JSON are either a real number or a [re, im] pair."""
    if isinstance(v, (list, tuple)):
        return float(v[0]), float(v[1])
    return float(np.real(v)), float(np.imag(v))


def map_sample_points(u: SmoothMap, count: int, rng: np.random.Generator, radius: Optional[float] = None) -> np.ndarray:
    """Domain samples whose images stay inside the target chart."""
    from .charts import random_points

    out = []
    while len(out) < count:
        pts = random_points(u.domain, count, rng, radius)
        keep = pts[np.asarray(u.target.contains(u.components(pts)), dtype=bool)]
        out.extend(keep)
    return np.array(out[:count])


def holomorphy_residual(u: SmoothMap, points) -> float:
    """Max of |sigma| (holomorphic) or |sigma'| (anti-holomorphic) over ``points``."""
    du = u.jacobian(points)
    y = u(points)
    s, sp = split(du, u.domain.acs(points), u.target.acs(y))
    part = s if u.holomorphy == HOLOMORPHIC else sp
    ginv = np.linalg.inv(u.domain.metric(points))
    return float(np.sqrt(np.max(np.abs(form_norm2(part, ginv, u.target.metric(y))))))


def _check_holomorphy(u: SmoothMap, count: int = 100, tol: float = 1e-8):
    if u.holomorphy == GENERIC:
        return
    pts = map_sample_points(u, count, np.random.default_rng(2))
    res = holomorphy_residual(u, pts)
    if res > tol:
        raise ModelConstructionError(f"{u.name}: declared {u.holomorphy} but residual {res:.3e}", {"holomorphy": res})


def get_map(name: str) -> SmoothMap:
    if name not in MAP_SPECS:
        raise ConfigError(f"unknown map {name!r}; known: {sorted(MAP_SPECS)}")
    return build_map(MAP_SPECS[name])


def maps_of_class(holomorphy: str):
    return [k for k, s in MAP_SPECS.items() if s.holomorphy_class == holomorphy]
