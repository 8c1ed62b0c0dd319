"""Named verification suites.  Each suite returns a VerificationReport whose
checks carry the residual, tolerance and a short quoted anchor."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from ..charts import chart_invariant_residuals, random_points
from ..differentiation import DifferentiationConfig, second_partial
from ..errors import ConfigError, PluriharmError, PreconditionError
from ..geometry import (
    christoffel_levi_civita,
    codifferential_J_and_V,
    covariant_acs,
    connection_axiom_residuals,
    fundamental_form_and_domega,
    local_geometry,
    nabla_J,
    nijenhuis,
    nijenhuis_identity_residual,
    second_canonical,
    riemann_tensor,
    sectional_curvature,
)
from ..maps import (
    ANTI_HOLOMORPHIC,
    HOLOMORPHIC,
    differential,
    hessian_levi_civita,
    hessian_second_canonical,
    jet,
    max_defect_norm,
    pluriharmonic_defect,
    prop41_equivalence_residual,
    sigma_split,
    tension_shift_residual,
    theorem_A_identity_residual,
    torsion_contraction,
)
from ..models import (
    KAEHLER_TARGETS,
    MAP_SPECS,
    MODEL_SPECS,
    ModelSpec,
    build_map,
    get_map,
    get_model,
    get_radial_model,
    holomorphy_residual,
    map_sample_points,
    maps_of_class,
    random_quadratic_map,
)
from ..monotonicity import (
    MonotonicityCase,
    differential_inequality_check,
    growth_diagnostic,
    measure_hypotheses,
    radial_reference_integral,
    ratio_curve,
    weighted_partial_energy,
)
from ..quadrature import QuadratureRule
from ..radial import (
    CASES,
    WeightFunction,
    comparison_check,
    convex_weight_branch,
    eigen_pair_sum,
    half_r_squared_constant,
    hess_r,
    metric_eigenvalues,
    pair_sum,
    power_exponent,
    riccati_residual,
)
from ..stress_energy import (
    explicit_counterexample,
    general_form_violation_search,
    j_adapted_form,
    lemma_c_residual,
    lemma_d_residual,
    lower_bound_sweep,
    one_form,
    random_sigma,
    sigma_codifferential_residual,
    stress_lower_bound,
    stress_tensor,
)
from .report import CheckRecord, VerificationReport, check_from_residuals

SUITE_IDS = (
    "connection_axioms",
    "lemma32",
    "theorem31",
    "prop41",
    "prop42",
    "lemma44_46",
    "lemma25_divergence",
    "lemma47_bound",
    "lemma45_comparison",
    "lemma49_411_sums",
    "thm410_412_monotonicity",
    "thm413_annulus",
    "sec5_growth",
    "classification_zoo",
)

THREADS_ENV = "PLURIHARM_THREADS"
SUITE_SPEC_SCHEMA = "pluriharm.suite/1"
IDENTITY_TOL = 1e-6


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer")


@dataclass
class SuiteSpec:
    """Everything that determines a suite run; JSON round-trippable.

    ``samples`` scales every per-suite sample count (1.0 = the documented
    defaults); ``radii`` overrides the monotonicity radii; ``tol`` overrides
    the identity tolerance."""

    suite_id: str
    models: Optional[list] = None
    maps: Optional[list] = None
    radii: Optional[list] = None
    seed: int = 0
    fd_scheme: str = "central2"
    fd_step: float = 1e-5
    fd_outer_step: float = 2e-4
    radial_count: int = 24
    angle_count: int = 16
    tol: Optional[float] = None
    samples: float = 1.0
    threads: int = field(default_factory=default_threads)

    def __post_init__(self):
        if self.suite_id not in SUITE_IDS:
            raise ConfigError(f"unknown suite {self.suite_id!r}; expected one of {SUITE_IDS}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.samples <= 0:
            raise ConfigError("samples scale must be positive")

    @property
    def cfg(self) -> DifferentiationConfig:
        return DifferentiationConfig(self.fd_scheme, self.fd_step, self.fd_outer_step)

    def rule(self, dim: int) -> QuadratureRule:
        return QuadratureRule(dim, self.radial_count, self.angle_count)

    @property
    def identity_tol(self) -> float:
        return IDENTITY_TOL if self.tol is None else float(self.tol)

    def count(self, default: int, minimum: int = 1) -> int:
        return max(minimum, int(round(default * self.samples)))

    def rng(self, *keys) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), SUITE_IDS.index(self.suite_id), *[int(k) for k in keys]])

    def to_json(self) -> str:
        return json.dumps({"schema": SUITE_SPEC_SCHEMA, **asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SuiteSpec":
        data = json.loads(text)
        schema = data.pop("schema", SUITE_SPEC_SCHEMA)
        if schema != SUITE_SPEC_SCHEMA:
            raise ConfigError(f"unsupported suite spec schema {schema!r}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"invalid suite spec: {exc}") from None


def _pmap(fn: Callable, items, threads: int):
    """Order-preserving map; inputs are fully drawn beforehand so results do not depend on threads."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _model_names(spec: SuiteSpec, default=None):
    names = spec.models or default or list(MODEL_SPECS)
    for n in names:
        if n not in MODEL_SPECS:
            raise ConfigError(f"unknown model {n!r}")
    return names


def _map_names(spec: SuiteSpec, default):
    names = spec.maps or default
    for n in names:
        if n not in MAP_SPECS:
            raise ConfigError(f"unknown map {n!r}")
    return names


def _unit(v):
    return v / np.linalg.norm(v)


# -- suites ------------------------------------------------------------------------------


def suite_connection_axioms(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    anchor = "unique connection satisfying"
    n = spec.count(100)
    for k, name in enumerate(_model_names(spec)):
        chart = get_model(name)
        pts = random_points(chart, n, spec.rng(k))
        res = _pmap(lambda p: connection_axiom_residuals(chart, p, spec.cfg), pts, spec.threads)
        for key, label in (
            ("nabla_g", "metric compatibility"),
            ("nabla_J", "J parallel"),
            ("torsion_11", "J-invariant torsion vanishes"),
            ("torsion_antilinear_plus_nijenhuis", "anti-linear torsion equals -N_J"),
            ("levi_civita_nabla_g", "Levi-Civita metric compatibility"),
        ):
            report.add(check_from_residuals(f"{name}: {label}", anchor, [r[key] for r in res], tol))

        def wrappers(p):
            geo = local_geometry(chart, p, spec.cfg)
            lc = christoffel_levi_civita(chart, p, spec.cfg).gamma
            via_lc = float(np.max(np.abs(nabla_J(chart, p, spec.cfg) - covariant_acs(geo, lc))))
            kaehler_gap = float(np.max(np.abs(second_canonical(chart, p, spec.cfg).gamma - lc)))
            return via_lc, kaehler_gap

        sub = _pmap(wrappers, pts[: spec.count(10)], spec.threads)
        report.add(check_from_residuals(f"{name}: nabla J agrees with the Levi-Civita coefficients", anchor, [r[0] for r in sub], 1e-9))
        if MODEL_SPECS[name].expected_flags.get("kaehler"):
            report.add(check_from_residuals(f"{name}: second canonical equals Levi-Civita on a Kaehler chart", "consistent with the Levi--Civita connection",
                                            [r[1] for r in sub], 1e-7))


def suite_lemma32(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    n = spec.count(100)
    for k, name in enumerate(_model_names(spec)):
        chart = get_model(name)
        rng = spec.rng(k)
        pts = random_points(chart, n, rng)
        XY = rng.normal(size=(n, 2, chart.dim))

        def one(args):
            p, (X, Y) = args
            geo = local_geometry(chart, p, spec.cfg)
            via_public = nijenhuis(chart, p, X, Y, spec.cfg)
            cached = np.einsum("kij,i,j->k", geo.nijenhuis, X, Y)
            return geo.vector_norm(nijenhuis_identity_residual(geo, X, Y)), float(np.max(np.abs(via_public - cached)))

        res = _pmap(one, zip(pts, XY), spec.threads)
        report.add(check_from_residuals(f"{name}: Nijenhuis identity", "whose proof is a straightforward calculation", [r[0] for r in res], tol))
        report.add(check_from_residuals(f"{name}: Nijenhuis evaluation paths agree", "torsion of J", [r[1] for r in res], 1e-12))


def suite_theorem31(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    n = spec.count(200)
    names = _map_names(spec, maps_of_class(HOLOMORPHIC))
    for k, name in enumerate(names):
        u = get_map(name)
        rng = spec.rng(k)
        pts = map_sample_points(u, n, rng)
        XY = rng.normal(size=(n, 2, u.domain.dim))

        def one(args):
            p, (X, Y) = args
            j = jet(u, p, spec.cfg)
            P = pluriharmonic_defect(u, p, _unit(X), _unit(Y), spec.cfg, j)
            return max_defect_norm(j), j.tgt.vector_norm(P)

        res = _pmap(one, zip(pts, XY), spec.threads)
        report.add(check_from_residuals(f"{name}: pluriharmonic defect (frame norm)", "must be Hermitian pluriharmonic", [r[0] for r in res], tol))
        report.add(check_from_residuals(f"{name}: defect at random unit X, Y", "must be Hermitian pluriharmonic", [r[1] for r in res], tol))
        ident = []
        for p, (X, Y) in list(zip(pts, XY))[: spec.count(50)]:
            resid, _, _ = theorem_A_identity_residual(u, p, X, Y, spec.cfg, tol)
            ident.append(local_geometry(u.target, u(p), spec.cfg).vector_norm(resid))
        report.add(check_from_residuals(f"{name}: defect equals twice the Nijenhuis mismatch", "holomorphic", ident, tol))


def _random_kaehler_maps(spec: SuiteSpec, count: int):
    """Seeded random quadratic maps from every zoo chart into a Kaehler target."""
    names = _model_names(spec)
    out = []
    for k in range(count):
        dom = get_model(names[k % len(names)])
        tname = KAEHLER_TARGETS[(k // len(names)) % len(KAEHLER_TARGETS)]
        tgt = get_model(tname)
        rng = spec.rng(1000 + k)
        scale = 0.05 if tname == "bergman" else 0.4
        center = np.zeros(tgt.dim) if tname == "bergman" else rng.normal(size=tgt.dim)
        out.append(random_quadratic_map(f"random_{k}_{dom.name}_to_{tname}", dom, tgt, rng, scale, center))
    return out


def suite_prop41(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    maps = _random_kaehler_maps(spec, spec.count(100))

    def one(k):
        u = maps[k]
        rng = spec.rng(k)
        p = map_sample_points(u, 1, rng)[0]
        X, Y = rng.normal(size=(2, u.domain.dim))
        j = jet(u, p, spec.cfg)
        res = j.tgt.vector_norm(prop41_equivalence_residual(u, p, X, Y, spec.cfg, tol))
        B = hessian_levi_civita(u, p, spec.cfg, j)
        Bt = hessian_second_canonical(u, p, spec.cfg, j)
        sym = float(np.max(np.abs(B - np.swapaxes(B, 1, 2))))
        anti = float(np.max(np.abs((Bt - np.swapaxes(Bt, 1, 2)) - torsion_contraction(u, p, spec.cfg, j))))
        return res, sym, anti

    res = _pmap(one, range(len(maps)), spec.threads)
    report.add(check_from_residuals("random maps: second canonical vs Levi-Civita defect", "the second fundamental form in the Levi--Civita connections", [r[0] for r in res], tol))
    report.add(check_from_residuals("random maps: Levi-Civita Hessian symmetric", "the second fundamental form in the Levi--Civita connections", [r[1] for r in res], tol))
    report.add(check_from_residuals("random maps: antisymmetric part of the canonical Hessian is the torsion contraction", "the second fundamental form in the Levi--Civita connections", [r[2] for r in res], tol))


def suite_prop42(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    maps = _random_kaehler_maps(spec, spec.count(100))

    def one(k):
        u = maps[k]
        p = map_sample_points(u, 1, spec.rng(k))[0]
        return local_geometry(u.target, u(p), spec.cfg).vector_norm(tension_shift_residual(u, p, spec.cfg, tol))

    res = _pmap(one, range(len(maps)), spec.threads)
    report.add(check_from_residuals("random maps: tension shift by du(V)", "where $V=-J\\delta J$", res, tol))


def suite_lemma44_46(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    n = spec.count(20)
    default = [m for m in maps_of_class(ANTI_HOLOMORPHIC) if MAP_SPECS[m].target_model in KAEHLER_TARGETS]
    for k, name in enumerate(_map_names(spec, default)):
        u = get_map(name)
        rng = spec.rng(k)
        pts = map_sample_points(u, n, rng)
        XY = rng.normal(size=(n, 2, u.domain.dim))

        def one(args):
            p, (X, Y) = args
            return sigma_codifferential_residual(u, p, spec.cfg, tol), lemma_c_residual(u, p, X, Y, spec.cfg, tol)

        res = _pmap(one, zip(pts, XY), spec.threads)
        report.add(check_from_residuals(f"{name}: codifferential of sigma equals sigma(V)", "$\\delta \\sigma =\\sigma(V)$", [r[0] for r in res], tol))
        report.add(check_from_residuals(f"{name}: d sigma equals J du N_J", "$\\dd \\sigma =J^N\\circ \\dd u\\circ \\mathcal{N}_J$", [r[1] for r in res], tol))


def suite_lemma25_divergence(spec: SuiteSpec, report: VerificationReport):
    tol = spec.identity_tol
    names = _model_names(spec)
    count = spec.count(500)
    tags = ("sigma", "du", "sigma_prime")
    triples = []
    for k in range(count):
        dom = get_model(names[k % len(names)])
        tname = KAEHLER_TARGETS[(k // len(names)) % 2] if k % 3 else "perturbed"
        tgt = get_model(tname)
        rng = spec.rng(k)
        small = tname in ("bergman", "perturbed")
        u = random_quadratic_map(f"triple_{k}", dom, tgt, rng, 0.05 if small else 0.4, np.zeros(tgt.dim))
        p = map_sample_points(u, 1, rng)[0]
        triples.append((one_form(u, tags[k % 3]), p, rng.normal(size=dom.dim), rng.normal(size=dom.dim)))

    def one(t):
        omega, p, X, nu = t
        divergence_gap = lemma_d_residual(omega, p, X, spec.cfg)
        S = stress_tensor(omega, p, spec.cfg)
        m = omega.base_map.domain.dim_half
        nu = nu / np.sqrt(nu @ S.g @ nu)
        trace_res = abs(S.trace() - (m - 1) * S.norm2)
        sym = float(np.max(np.abs(S.s - S.s.T)))
        lower = max(0.0, -(S(nu, nu) + 0.5 * S.norm2))
        sigma_pos = max(0.0, -S(nu, nu)) if omega.tag == "sigma" else 0.0
        return divergence_gap, trace_res, sym, lower, sigma_pos

    res = _pmap(one, triples, spec.threads)
    report.add(check_from_residuals("divergence of the stress tensor", "the following useful lemma", [r[0] for r in res], tol))
    report.add(check_from_residuals("stress trace equals (m-1)|omega|^2", "The stress-energy tensor of", [r[1] for r in res], 1e-10))
    report.add(check_from_residuals("stress tensor symmetric", "The stress-energy tensor of", [r[2] for r in res], 1e-12))
    report.add(check_from_residuals("S(X,X) >= -|omega|^2 |X|^2 / 2", "The stress-energy tensor of", [r[3] for r in res], 1e-12))
    report.add(check_from_residuals("S_sigma(nu,nu) >= 0 for unit nu", "outside a compact subset", [r[4] for r in res], 1e-12))


def suite_lemma47_bound(spec: SuiteSpec, report: VerificationReport):
    trials = spec.count(1000)
    anchor = "the eigenvalues of $H$"
    for m in (2, 3):
        sweep = lower_bound_sweep(m, trials if m == 2 else max(1, trials // 5), spec.seed)
        report.add(CheckRecord(f"m={m}: equality for H = g", anchor, sweep.equality_residual, sweep.equality_residual, 1e-10, sweep.trials))
        report.add(CheckRecord(f"m={m}: no violation over J-adapted trials", anchor, float(sweep.violations), float(sweep.violations) / sweep.trials, 0.0, sweep.trials,
                               f"worst margin {sweep.worst_margin:.3e}"))
    # closed form: conjugation on flat C^2 has S_sigma = g
    u = get_map("conj_flat")
    p = np.array([0.3, -0.2, 0.1, 0.5])
    S = stress_tensor(one_form(u, "sigma"), p, spec.cfg)
    report.add(CheckRecord("conjugation: S_sigma equals g", "The stress-energy tensor of", float(np.max(np.abs(S.s - np.eye(4)))), 0.0, 1e-12))
    g, J = np.eye(4), u.domain.acs_at(p)
    lhs, bound = stress_lower_bound(np.zeros((4, 4)), j_adapted_form(g, J, np.arange(4.0)), g, J, g)
    report.add(CheckRecord("sigma = 0 gives 0 = bound", anchor, abs(lhs) + abs(bound), 0.0, 1e-15))
    try:
        rng = spec.rng(7)
        Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        from ..stress_energy import JAdaptedForm

        stress_lower_bound(random_sigma(J, J, rng), JAdaptedForm(Q @ np.diag([0, 1, 2, 3.0]) @ Q.T, Q, np.arange(4.0)), g, J, g)
        rejected = 0.0
    except PreconditionError:
        rejected = 1.0
    report.add(CheckRecord("non-adapted H rejected", anchor, 1.0 - rejected, 0.0, 0.0))
    search = general_form_violation_search(2, trials, spec.seed)
    lhs_c, bound_c = explicit_counterexample(2)
    report.findings.append({
        "name": "general symmetric H",
        "summary": f"{search.violations}/{search.trials} random non-adapted trials violate the bound (worst margin {search.worst_margin:.3e}); "
                   f"explicit example: <S,H> = {lhs_c:g} < bound {bound_c:g}",
        "violations": search.violations,
        "trials": search.trials,
        "explicit_example": {"lhs": lhs_c, "bound": bound_c},
    })


def _distance_hessian(model, p, cfg):
    """Hess r from nested differences of the distance function, independent of the assembled form."""
    chart = model.chart
    n = chart.dim
    dist = lambda x: np.linalg.norm(np.asarray(x), axis=-1)  # noqa: E731
    scale = 0.01 * float(np.linalg.norm(p))  # stencil proportional to r keeps truncation bounded near the pole
    fine = DifferentiationConfig("central4", scale, scale)
    d2 = np.array([[second_partial(dist, p, i, j, fine, chart.contains) for j in range(n)] for i in range(n)])
    G = local_geometry(chart, p, cfg).gamma
    return d2 - np.einsum("kij,k->ij", G, p / np.linalg.norm(p))


def suite_lemma45_comparison(spec: SuiteSpec, report: VerificationReport):
    anchor = "the radial curvature of $M$"
    n = spec.count(20, 2)
    for case in CASES:
        model = get_radial_model(f"warped_{case}")
        radii = np.linspace(0.1, 5.0, n)
        rows = comparison_check(model, radii, spec.cfg)
        report.add(check_from_residuals(f"case {case}: comparison margin", anchor, [max(0.0, -r.margin) for r in rows], 1e-6))
        report.add(check_from_residuals(f"case {case}: Hess r matches (psi'/psi)(g - dr dr)", anchor, [r.closed_form_residual for r in rows], 1e-7))
        report.add(CheckRecord(f"case {case}: Riccati consistency", anchor, riccati_residual(model, np.linspace(0.05, 5.5, 50)), 0.0, 1e-7, 50))
        cross = []
        for r in radii[:: max(1, n // 5)]:
            p = r * _unit(np.arange(1.0, model.chart.dim + 1))
            cross.append(float(np.max(np.abs(_distance_hessian(model, p, spec.cfg) - hess_r(model, p, spec.cfg)))))
        report.add(check_from_residuals(f"case {case}: Hess r against second differences of r", anchor, cross, 1e-6))
        eig = []
        for r in radii:
            p = r * _unit(np.ones(model.chart.dim))
            ev = metric_eigenvalues(hess_r(model, p, spec.cfg), model.chart.metric_at(p))
            eig.append(max(abs(ev[0]), float(np.max(np.abs(ev[1:] - model.nonradial_eigenvalue(r))))))
        report.add(check_from_residuals(f"case {case}: spectrum {{0, psi'/psi}}", anchor, eig, 1e-7))


def _weights_for(case: str, params: dict):
    """Weights whose bound applies to a model of the given curvature case."""
    beta = params.get("beta", 1.0)
    A = power_exponent(params.get("a", 1.0))
    out = [WeightFunction("half_r_squared")] if case in ("i", "ii", "iii") else []
    if case == "iv":
        out += [WeightFunction("cosh_beta_r", beta=beta), WeightFunction("power_A", A=power_exponent(beta))]
    if case == "v":
        out.append(WeightFunction("power_A", A=A))
    return out


def suite_lemma49_411_sums(spec: SuiteSpec, report: VerificationReport):
    n = spec.count(20, 2)
    anchors = {
        "half_r_squared": "eigenvalues of Hess r^2/2",
        "cosh_beta_r": "the eigenvalues of $\\mathrm{Hess\\,} \\cosh(\\beta r)$",
        "power_A": "eigenvalues of Hess (1+r)^{A+1}/(A+1)",
    }
    for case in CASES:
        model = get_radial_model(f"warped_{case}")
        for w in _weights_for(case, model.params):
            margins, branch, pairing = [], [], []
            for r in np.linspace(0.2, 4.0, n):
                p = r * _unit(np.ones(model.chart.dim))
                s, bound, eigs = eigen_pair_sum(model, w, p, spec.cfg)
                margins.append(max(0.0, bound - s))
                h = model.nonradial_eigenvalue(r)
                branch.append(abs(s - convex_weight_branch(w.d1(r), w.d2(r), h, model.m)))
                e = np.sort(eigs)
                pairing.append(abs(pair_sum(e, model.m) - (e.sum() - e[model.m - 1] - e[-1])))
            report.add(check_from_residuals(f"case {case}, {w.kind}: pair sum above bound", anchors[w.kind], margins, 1e-7))
            report.add(check_from_residuals(f"case {case}, {w.kind}: branch formula", "non-decreasing convex $C^2$ function", branch, 1e-7))
            report.add(check_from_residuals(f"case {case}, {w.kind}: sorted pairing", anchors[w.kind], pairing, 1e-12))
    params = get_radial_model("warped_ii").params
    report.findings.append({
        "name": "r^2/2 constant in case ii",
        "summary": "eigenvalue-sum constant and the smaller constant stated with the monotonicity formula",
        "eigenvalue_constant": half_r_squared_constant("ii", params, 2, "lemma"),
        "stated_constant": half_r_squared_constant("ii", params, 2, "theorem"),
    })


def _growth_finding(name: str, g) -> dict:
    summary = f"fitted rate {g.fitted_rate:.4f} against {g.fit_variable}, critical {g.critical_rate:g}, hypothesis {'satisfied' if g.hypothesis_consistent else 'violated'}"
    return {"name": name, "summary": summary, **g.to_dict()}


def _curve_record(name: str, curve) -> dict:
    return {"name": name, **curve.to_dict()}


FLAT_RADII = (0.25, 0.5, 1.0, 2.0)
HYPERBOLIC_RADII = tuple(np.linspace(0.2, 2.0, 20))


def _hyperbolic_curve(spec: SuiteSpec, case: MonotonicityCase, radii):
    model = get_model("bergman")
    u = get_map("conj_bergman")
    hyp = measure_hypotheses(u, model, case, float(radii[-1]), spec.count(100), spec.seed, spec.cfg)
    return u, model, ratio_curve(u, model, case, radii, spec.rule(model.dim), hyp)


def suite_thm410_412_monotonicity(spec: SuiteSpec, report: VerificationReport):
    flat = get_model("flat")
    rule = spec.rule(flat.dim)
    u = get_map("conj_flat")
    case_i = MonotonicityCase("i", 2)
    radii = spec.radii or FLAT_RADII
    hyp = measure_hypotheses(u, flat, case_i, float(radii[-1]), spec.count(100), spec.seed, spec.cfg)
    curve = ratio_curve(u, flat, case_i, radii, rule, hyp)
    report.curves.append(_curve_record("flat_conjugation_case_i", curve))
    closed = np.pi**2 * np.asarray(radii) ** 2
    report.add(check_from_residuals("flat conjugation: ratio equals pi^2 r^2", "where $\\lambda =D-2C_1>0$", np.abs(curve.ratios / closed - 1), 1e-4))
    ball = weighted_partial_energy(u, flat, 1.0, case_i, rule)
    report.add(CheckRecord("flat conjugation: integral over the unit ball", "where $\\lambda =D-2C_1>0$", abs(ball - 9.8696), abs(ball - 9.8696), 1e-3))
    report.add(CheckRecord("flat conjugation: hypotheses certified", "where $\\lambda =D-2C_1>0$", 0.0 if curve.certified else 1.0, 0.0, 0.0))
    report.add(CheckRecord("flat conjugation: ratio non-decreasing", "where $\\lambda =D-2C_1>0$", -curve.monotonicity_violation(), 0.0, 1e-6, len(radii)))
    lhs, rhs = differential_inequality_check(u, flat, case_i, 1.0, rule)
    report.add(CheckRecord("flat conjugation: boundary inequality at r = 1", "where $\\lambda =D-2C_1>0$", max(0.0, rhs - lhs), 0.0, 1e-6,
                           note=f"lhs {lhs:.6f} (4 pi^2), rhs {rhs:.6f} (2 pi^2)"))
    hol = get_map("poly_flat")
    hcurve = ratio_curve(hol, flat, case_i, radii, rule)
    report.add(check_from_residuals("holomorphic map: ratio identically zero", "where $\\lambda =D-2C_1>0$", np.abs(hcurve.ratios), 1e-12))

    case_iv = MonotonicityCase("iv", 2, C=0.0, beta=1.0)
    hradii = spec.radii or HYPERBOLIC_RADII
    ub, model, hc = _hyperbolic_curve(spec, case_iv, hradii)
    report.curves.append(_curve_record("hyperbolic_conjugation_case_iv", hc))
    anchor = "If $|V|\\le \\coth(\\beta r)C_2$"
    report.add(CheckRecord("hyperbolic conjugation: hypotheses certified", anchor, 0.0 if hc.certified else 1.0, 0.0, 0.0, note=json.dumps(hc.hypotheses, sort_keys=True)))
    report.add(CheckRecord("hyperbolic conjugation: ratio non-decreasing", anchor, -hc.monotonicity_violation(), 0.0, 1e-6, len(hradii)))
    scale = np.maximum(hc.boundary_integrals * [case_iv.boundary_factor(r) for r in hc.radii], 1.0)
    report.add(check_from_residuals("hyperbolic conjugation: differential inequality", anchor, np.maximum(0.0, -hc.margins / scale), 1e-6))
    ref = radial_reference_integral(lambda s: 1 / np.cosh(s) ** 4 + 1 / np.cosh(s) ** 2, model, 0.5, np.cosh)
    val = weighted_partial_energy(ub, model, 0.5, case_iv, spec.rule(model.dim))
    report.add(CheckRecord("hyperbolic conjugation: ball integral against 1D reference", anchor, abs(val / ref - 1), abs(val / ref - 1), 1e-6))
    fine = ratio_curve(ub, model, case_iv, list(hradii)[:: max(1, len(hradii) // 4)], spec.rule(model.dim).refined(2))
    coarse = np.interp(fine.radii, hc.radii, hc.ratios)
    report.add(check_from_residuals("hyperbolic conjugation: ratios stable under doubled resolution", anchor, np.abs(fine.ratios / coarse - 1), 1e-5))


def suite_thm413_annulus(spec: SuiteSpec, report: VerificationReport):
    anchor = "outside a compact subset"
    R0 = 0.1
    hradii = spec.radii or HYPERBOLIC_RADII
    full_case = MonotonicityCase("iv", 2, C=0.0, beta=1.0)
    ann_case = MonotonicityCase("iv_annulus", 2, C=0.0, beta=1.0, R0=R0)
    u, model, full = _hyperbolic_curve(spec, full_case, hradii)
    _, _, ann = _hyperbolic_curve(spec, ann_case, hradii)
    report.curves.append(_curve_record("hyperbolic_conjugation_case_iv_annulus", ann))
    rule = spec.rule(model.dim)
    inner = weighted_partial_energy(u, model, R0, full_case, rule)
    add = np.abs(ann.weighted_integrals + inner - full.weighted_integrals) / np.maximum(full.weighted_integrals, 1e-300)
    report.add(check_from_residuals("annulus plus inner ball equals the full ball", anchor, add, 1e-9))
    report.add(CheckRecord("annulus ratio non-decreasing", anchor, -ann.monotonicity_violation(), 0.0, 1e-6, len(hradii)))
    scale = np.maximum(ann.boundary_integrals * [ann_case.boundary_factor(r) for r in ann.radii], 1.0)
    report.add(check_from_residuals("annulus differential inequality", anchor, np.maximum(0.0, -ann.margins / scale), 1e-6))
    small = MonotonicityCase("iv_annulus", 2, C=0.0, beta=1.0, R0=1e-3)
    probe = list(hradii)[:: max(1, len(hradii) // 4)]
    near = ratio_curve(u, model, small, probe, rule, raw=False)
    ref = np.interp(near.radii, full.radii, full.ratios)
    report.add(check_from_residuals("annulus ratios converge to full-ball ratios as R0 -> 0", anchor, np.abs(near.ratios / ref - 1), 1e-5))
    # power weight: the first branch of C(R0) (A R0/(1+R0) >= 1) is a valid bound for every r > R0
    v_case = MonotonicityCase("v_annulus", 2, C=0.0, a=1.0, R0=2.0)
    v_radii = np.linspace(2.2, 4.0, 10)
    vc = ratio_curve(u, model, v_case, v_radii, rule, measure_hypotheses(u, model, v_case, 4.0, spec.count(50), spec.seed, spec.cfg))
    report.curves.append(_curve_record("hyperbolic_conjugation_case_v_annulus", vc))
    report.add(CheckRecord("power-weight annulus ratio non-decreasing", anchor, -vc.monotonicity_violation(), 0.0, 1e-6, len(v_radii),
                           note=f"R0 = 2, C(R0) = {v_case.annulus_C:.6f}"))
    # second branch (A R0/(1+R0) < 1): recorded as a finding
    small_case = MonotonicityCase("v_annulus", 2, C=0.0, a=1.0, R0=R0)
    sc = ratio_curve(u, model, small_case, np.linspace(0.2, 3.1, 12), rule, raw=False)
    drop = float(np.max(sc.ratios) / sc.ratios[-1])
    report.findings.append({
        "name": "power-weight annulus, small R0",
        "summary": f"with R0 = {R0} the constant C(R0) = {small_case.annulus_C:.4f} exceeds the eigenvalue bound away from R0; "
                   f"the ratio falls by a factor {drop:.1f} on [0.2, 3.1] and the boundary inequality margin reaches {float(np.min(sc.margins)):.3e}",
        "R0": R0,
        "C_R0": small_case.annulus_C,
        "ratio_drop_factor": drop,
        "min_margin": float(np.min(sc.margins)),
    })


def suite_sec5_growth(spec: SuiteSpec, report: VerificationReport):
    flat = get_model("flat")
    rule = spec.rule(flat.dim)
    case_i = MonotonicityCase("i", 2)
    radii = spec.radii or tuple(np.geomspace(0.2, 2.5, 10))
    anchor = "then $u$ is holomorphic"
    hol = get_map("poly_flat")
    hc = ratio_curve(hol, flat, case_i, radii, rule, measure_hypotheses(hol, flat, case_i, float(radii[-1]), spec.count(100), spec.seed, spec.cfg))
    g = growth_diagnostic(hc, case_i, hol, flat, tol=1e-9, samples=spec.count(500), seed=spec.seed)
    report.findings.append(_growth_finding("holomorphic growth", g))
    report.add(CheckRecord("holomorphic: growth hypothesis satisfied", anchor, 0.0 if g.hypothesis_consistent else 1.0, 0.0, 0.0))
    report.add(CheckRecord("holomorphic: max |delbar u|^2", anchor, g.max_delbar_energy if g.max_delbar_energy is not None else np.inf, 0.0, 1e-9))
    conj = get_map("conj_flat")
    cc = ratio_curve(conj, flat, case_i, radii, rule, measure_hypotheses(conj, flat, case_i, float(radii[-1]), spec.count(100), spec.seed, spec.cfg))
    gc = growth_diagnostic(cc, case_i, conj, flat)
    report.findings.append(_growth_finding("conjugation growth", gc))
    report.add(CheckRecord("conjugation: fitted slope 4", anchor, abs(gc.fitted_rate - 4.0), abs(gc.fitted_rate - 4.0), 0.1, len(radii)))
    report.add(CheckRecord("conjugation: slope exceeds lambda", anchor, max(0.0, gc.critical_rate - gc.fitted_rate), 0.0, 0.0, note=f"lambda = {gc.critical_rate}"))
    report.add(CheckRecord("conjugation: hypothesis reported violated", anchor, 1.0 if gc.hypothesis_consistent else 0.0, 0.0, 0.0))
    case_iv = MonotonicityCase("iv", 2, C=0.0, beta=1.0)
    model = get_model("bergman")
    ub = get_map("conj_bergman")
    hradii = tuple(np.linspace(0.5, 3.0, 10))
    bc = ratio_curve(ub, model, case_iv, hradii, spec.rule(model.dim))
    gb = growth_diagnostic(bc, case_iv)
    report.findings.append(_growth_finding("hyperbolic conjugation growth", gb))
    report.add(CheckRecord("hyperbolic conjugation: exponential rate exceeds (2m-3) beta", "o(e^{[(2m-3)\\beta-2C_2]r})",
                           max(0.0, gb.critical_rate - gb.fitted_rate), 0.0, 0.0, note=f"fitted rate {gb.fitted_rate:.4f} vs {gb.critical_rate}"))


def suite_classification_zoo(spec: SuiteSpec, report: VerificationReport):
    from ..geometry import classify

    for k, name in enumerate(_model_names(spec)):
        mspec = MODEL_SPECS[name]
        chart = get_model(name)
        pts = random_points(chart, spec.count(10), spec.rng(k))
        flags = classify(chart, pts, spec.cfg).as_dict()
        wrong = [c for c, v in mspec.expected_flags.items() if flags[c] != v]
        report.add(CheckRecord(f"{name}: expected class flags", "is called", float(len(wrong)), 0.0, 0.0, len(pts), note=", ".join(wrong)))
        inv = chart_invariant_residuals(chart, random_points(chart, spec.count(100), spec.rng(100 + k)))
        report.add(CheckRecord(f"{name}: J^2 = -1 and g(J.,J.) = g", "almost Hermitian", max(inv["acs_square"], inv["compatibility"]), 0.0, 1e-12))
        p = pts[0]
        same = ModelSpec.from_json(mspec.to_json()) == mspec
        report.add(CheckRecord(f"{name}: reconstructs from its spec", "deterministic construction", 0.0 if same else 1.0, 0.0, 0.0))
        omega, domega = fundamental_form_and_domega(chart, p, spec.cfg)
        report.add(CheckRecord(f"{name}: fundamental form antisymmetric", "fundamental $(1,1)$-form", float(np.max(np.abs(omega + omega.T))), 0.0, 1e-12))
    perturbed = get_model("perturbed")
    nmax = max(local_geometry(perturbed, p, spec.cfg).norm(local_geometry(perturbed, p, spec.cfg).nijenhuis, covariant=2)
               for p in random_points(perturbed, 10, spec.rng(999)))
    report.add(CheckRecord("perturbed: genuinely non-integrable", "torsion of J", 0.0 if nmax > 1e-3 else 1.0, 0.0, 0.0, note=f"max |N_J| = {nmax:.3e}"))
    # curvature hypothesis of the hyperbolic model along radial planes
    bergman = get_model("bergman")
    beta = bergman.params["beta"]
    rng = spec.rng(2024)
    excess = []
    for _ in range(spec.count(20)):
        x = _unit(rng.normal(size=4)) * rng.uniform(0.1, 0.8)
        R = riemann_tensor(bergman, x, spec.cfg)
        excess.append(max(0.0, sectional_curvature(bergman, x, x, rng.normal(size=4), spec.cfg, R) + beta**2))
    report.add(check_from_residuals("hyperbolic: radial curvature <= -beta^2", "the radial curvature of $M$", excess, 1e-6))
    # conformal example: measured |V| against the closed form
    conf = get_model("conformal")
    prof = conf.params["profile"]
    vec_dev, dev, stated_dev, measured = [], [], [], []
    direction = _unit(np.array([1.0, 0.3, -0.5, 0.2]))
    for r in np.linspace(0.2, 6.0, spec.count(50, 2)):
        p = r * direction
        _, V = codifferential_J_and_V(conf, p, spec.cfg)
        vn = local_geometry(conf, p, spec.cfg).vector_norm(V)
        measured.append(vn)
        coef = float(prof.V_vector_coefficient(r))
        vec_dev.append(np.linalg.norm(V - coef * direction) / max(abs(coef), 1e-300) if coef else np.linalg.norm(V))
        dev.append(abs(vn - float(prof.V_norm(r))))
        stated_dev.append(abs(vn - float(prof.stated_V_norm(r))))
    anchor = "consider the conformal metric"
    report.add(check_from_residuals("conformal: V equals 2(1-m) phi'/phi^3 grad r", anchor, vec_dev, 1e-5))
    report.add(check_from_residuals("conformal: |V| matches 2(1-m) phi'/phi^2", anchor, dev, 1e-4))
    report.add(check_from_residuals("conformal: |V| matches 2(1-m) phi'/phi^4", anchor, stated_dev, 1e-4,
                                    "stated norm omits |grad_g r| = phi in the deformed metric; measured |V| = C phi^2"))
    report.add(CheckRecord("conformal: |V| <= C", anchor, max(0.0, max(measured) - prof.C), 0.0, 1e-4, note=f"max |V| = {max(measured):.6f}"))
    # maps: declared class verified and sigma split consistent with du
    for k, name in enumerate(_map_names(spec, list(MAP_SPECS))):
        u = build_map(MAP_SPECS[name])
        pts = map_sample_points(u, spec.count(100), spec.rng(500 + k))
        if MAP_SPECS[name].holomorphy_class != "generic":
            report.add(CheckRecord(f"{name}: declared {u.holomorphy} class", "holomorphic", holomorphy_residual(u, pts), 0.0, 1e-8, len(pts)))
        s, sp = sigma_split(u, pts[0], spec.cfg)
        report.add(CheckRecord(f"{name}: sigma + sigma' = du", "the anti-holomorphic part", float(np.max(np.abs(s + sp - differential(u, pts[0], spec.cfg)))), 0.0, 1e-12))


SUITES = {
    "connection_axioms": suite_connection_axioms,
    "lemma32": suite_lemma32,
    "theorem31": suite_theorem31,
    "prop41": suite_prop41,
    "prop42": suite_prop42,
    "lemma44_46": suite_lemma44_46,
    "lemma25_divergence": suite_lemma25_divergence,
    "lemma47_bound": suite_lemma47_bound,
    "lemma45_comparison": suite_lemma45_comparison,
    "lemma49_411_sums": suite_lemma49_411_sums,
    "thm410_412_monotonicity": suite_thm410_412_monotonicity,
    "thm413_annulus": suite_thm413_annulus,
    "sec5_growth": suite_sec5_growth,
    "classification_zoo": suite_classification_zoo,
}

# acceptance criteria (by number in the build contract) each suite serves
SUITE_CRITERIA = {
    "connection_axioms": (1, 14),
    "lemma32": (2,),
    "theorem31": (3,),
    "prop41": (4,),
    "prop42": (4,),
    "lemma44_46": (6,),
    "lemma25_divergence": (5, 14),
    "lemma47_bound": (7,),
    "lemma45_comparison": (8,),
    "lemma49_411_sums": (8,),
    "thm410_412_monotonicity": (9, 10),
    "thm413_annulus": (11,),
    "sec5_growth": (12,),
    "classification_zoo": (13,),
}


def _environment(spec: SuiteSpec) -> dict:
    return {
        "seed": int(spec.seed),
        "fd_scheme": spec.fd_scheme,
        "fd_step": spec.fd_step,
        "fd_outer_step": spec.fd_outer_step,
        "radial_nodes": spec.radial_count,
        "angle_nodes": spec.angle_count,
        "threads": spec.threads,
        "sample_scale": spec.samples,
        "identity_tol": spec.identity_tol,
        "numpy": np.__version__,
        "spec": json.loads(spec.to_json()),
    }


def run_suite(spec: SuiteSpec) -> VerificationReport:
    """Run one suite.  Failing checks are recorded, not raised; construction
    and configuration errors propagate with the suite id attached."""
    report = VerificationReport(suite_id=spec.suite_id, environment=_environment(spec))
    start = time.perf_counter()
    try:
        SUITES[spec.suite_id](spec, report)
    except PluriharmError as exc:
        exc.args = (f"suite {spec.suite_id}: {exc.args[0] if exc.args else exc}",) + tuple(exc.args[1:])
        raise
    report.wall_time = time.perf_counter() - start
    return report
