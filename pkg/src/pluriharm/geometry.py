"""Pointwise almost Hermitian geometry of a chart.

Index conventions (all arrays are coordinate components):

* ``gamma[k, i, j]`` is Gamma^k_ij, i.e. nabla_{d_i} d_j = Gamma^k_ij d_k.
* ``nabla_J[i, k, j]`` is (nabla_i J)^k_j.
* (1,2)-tensors ``T[k, i, j]`` act as T(X, Y)^k = T[k, i, j] X^i Y^j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .charts import Chart
from .differentiation import DEFAULT_CONFIG, DifferentiationConfig, gradient
from .errors import ClassificationInconsistencyError, IllConditionedMetricError

LEVI_CIVITA = "levi_civita"
SECOND_CANONICAL = "second_canonical"


@dataclass(frozen=True)
class ConnectionCoefficients:
    gamma: np.ndarray
    kind: str

    def covariant(self, X, Y, dY=None) -> np.ndarray:
        """nabla_X Y at the point for a field Y with directional derivative dY = d_X Y."""
        out = np.einsum("kij,i,j->k", self.gamma, X, Y)
        return out if dY is None else out + dY

    def torsion(self) -> np.ndarray:
        return self.gamma - np.swapaxes(self.gamma, 1, 2)


def hermitian_frame(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """g-orthonormal frame {e_1..e_m, Je_1..Je_m} as matrix columns.

    Gram-Schmidt over the coordinate basis, each accepted e_a immediately
    paired with J e_a so the frame is J-adapted by construction.
    """
    n = g.shape[0]
    cols: list[np.ndarray] = []
    es, jes = [], []
    for k in range(n):
        if len(es) * 2 == n:
            break
        v = np.zeros(n)
        v[k] = 1.0
        for w in cols:
            v = v - (w @ g @ v) * w
        norm2 = v @ g @ v
        if norm2 < 1e-10:
            continue
        e = v / np.sqrt(norm2)
        je = J @ e
        je = je / np.sqrt(je @ g @ je)
        es.append(e)
        jes.append(je)
        cols.extend([e, je])
    if 2 * len(es) != n:
        raise IllConditionedMetricError("could not build a J-adapted orthonormal frame")
    return np.column_stack(es + jes)


@dataclass
class LocalGeometry:
    """Lazily evaluated geometric data of ``chart`` at the single point ``p``."""

    chart: Chart
    p: np.ndarray
    cfg: DifferentiationConfig = DEFAULT_CONFIG
    _cache: dict = field(default_factory=dict, repr=False)

    @cached_property
    def g(self):
        return self.chart.metric_at(self.p)

    @cached_property
    def ginv(self):
        return self.chart.inverse_metric(self.p)

    @cached_property
    def J(self):
        return self.chart.acs_at(self.p)

    @cached_property
    def dg(self):
        return self.chart.metric_derivative(self.p, self.cfg)

    @cached_property
    def dJ(self):
        return self.chart.acs_derivative(self.p, self.cfg)

    @cached_property
    def gamma(self):
        dg = self.dg
        lower = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
        return np.einsum("kl,lij->kij", self.ginv, lower)

    @cached_property
    def nabla_J(self):
        G, J = self.gamma, self.J
        return self.dJ + np.einsum("kil,lj->ikj", G, J) - np.einsum("lij,kl->ikj", G, J)

    @cached_property
    def canonical_difference(self):
        """K^k_ij with second-canonical nabla_X Y = Levi-Civita nabla_X Y + K(X, Y)."""
        A, J, g = self.nabla_J, self.J, self.g
        # A_J[a, k, l] with a the (J-rotated) derivative slot: (nabla_{J d_a} J)
        AJ = np.einsum("ba,bkl->akl", J, A)
        JA = np.einsum("kb,ibl->ikl", J, A)  # J (nabla_i J)
        term1 = -0.5 * np.einsum("lk,ikj->ijl", g, JA)
        t2 = np.einsum("ik,jkl->ijl", g, AJ) + np.einsum("ik,jkl->ijl", g, JA)
        t3 = np.einsum("ik,lkj->ijl", g, AJ) + np.einsum("ik,lkj->ijl", g, JA)
        lower = term1 + 0.25 * (t2 - t3)
        return np.einsum("kl,ijl->kij", self.ginv, lower)

    @cached_property
    def gamma_canonical(self):
        return self.gamma + self.canonical_difference

    @cached_property
    def frame(self):
        return hermitian_frame(self.g, self.J)

    @cached_property
    def nijenhuis(self):
        """N[k, i, j] from coordinate-constant fields: 4N = J[X,JY] + J[JX,Y] - [JX,JY]."""
        J, dJ = self.J, self.dJ
        t = np.einsum("ka,iaj->kij", J, dJ)  # J (d_X J) Y
        u = np.einsum("ai,akj->kij", J, dJ)  # (d_{JX} J) Y
        return 0.25 * (t - np.swapaxes(t, 1, 2) - u + np.swapaxes(u, 1, 2))

    @cached_property
    def delta_J(self):
        E = self.frame
        return -np.einsum("iA,ikj,jA->k", E, self.nabla_J, E)

    @cached_property
    def V(self):
        return -self.J @ self.delta_J

    @cached_property
    def omega(self):
        return np.einsum("ki,kj->ij", self.J, self.g)

    @cached_property
    def d_omega_partials(self):
        """d_i omega_jk."""
        return np.einsum("iak,aj->ijk", self.dg, self.J) + np.einsum("iaj,ak->ijk", self.dJ, self.g)

    @cached_property
    def d_omega(self):
        D = self.d_omega_partials
        return D - np.einsum("jik->ijk", D) + np.einsum("kij->ijk", D)

    def norm(self, T: np.ndarray, covariant: int = 0) -> float:
        """Frobenius norm of a tensor measured in the J-adapted orthonormal frame.

        The first ``T.ndim - covariant`` indices are contravariant."""
        E = self.frame
        Einv = np.linalg.inv(E)
        out = T
        for axis in range(T.ndim):
            M = Einv if axis < T.ndim - covariant else E.T
            out = np.moveaxis(np.tensordot(M, out, axes=(1, axis)), 0, axis)
        return float(np.linalg.norm(out))

    def vector_norm(self, v) -> float:
        return float(np.sqrt(max(v @ self.g @ v, 0.0)))


def local_geometry(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> LocalGeometry:
    return LocalGeometry(chart, chart.check_point(p), cfg)


def christoffel_levi_civita(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> ConnectionCoefficients:
    return ConnectionCoefficients(local_geometry(chart, p, cfg).gamma, LEVI_CIVITA)


def nabla_J(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    return local_geometry(chart, p, cfg).nabla_J


def nijenhuis(chart: Chart, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    return np.einsum("kij,i,j->k", local_geometry(chart, p, cfg).nijenhuis, X, Y)


def second_canonical(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> ConnectionCoefficients:
    return ConnectionCoefficients(local_geometry(chart, p, cfg).gamma_canonical, SECOND_CANONICAL)


def codifferential_J_and_V(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    geo = local_geometry(chart, p, cfg)
    return geo.delta_J, geo.V


def fundamental_form_and_domega(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    geo = local_geometry(chart, p, cfg)
    return geo.omega, geo.d_omega


# -- connection axioms -------------------------------------------------------


def covariant_metric(geo: LocalGeometry, gamma: np.ndarray) -> np.ndarray:
    """(nabla_i g)_jk for a connection with coefficients ``gamma``."""
    return geo.dg - np.einsum("lij,lk->ijk", gamma, geo.g) - np.einsum("lik,jl->ijk", gamma, geo.g)


def covariant_acs(geo: LocalGeometry, gamma: np.ndarray) -> np.ndarray:
    """(nabla_i J)^k_j for a connection with coefficients ``gamma``."""
    J = geo.J
    return geo.dJ + np.einsum("kil,lj->ikj", gamma, J) - np.einsum("lij,kl->ikj", gamma, J)


def torsion_11_part(T: np.ndarray, J: np.ndarray) -> np.ndarray:
    """J-invariant part 1/2 [T(X,Y) + T(JX,JY)] of a vector-valued 2-form T^k_ij."""
    return 0.5 * (T + np.einsum("kab,ai,bj->kij", T, J, J))


def torsion_antilinear_part(T: np.ndarray, J: np.ndarray) -> np.ndarray:
    """1/4 [T(X,Y) + J T(JX,Y) + J T(X,JY) - T(JX,JY)]: the part with T(JX,Y) = -J T(X,Y).

    For the second canonical connection this equals -N_J."""
    TJX = np.einsum("kaj,ai->kij", T, J)
    TJY = np.einsum("kia,aj->kij", T, J)
    TJJ = np.einsum("kab,ai,bj->kij", T, J, J)
    return 0.25 * (T + np.einsum("ka,aij->kij", J, TJX + TJY) - TJJ)


def connection_axiom_residuals(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> dict:
    """Frame norms of nabla~ g, nabla~ J and the (1,1) torsion of the second canonical connection."""
    geo = local_geometry(chart, p, cfg)
    G = geo.gamma_canonical
    T = G - np.swapaxes(G, 1, 2)
    return {
        "nabla_g": geo.norm(covariant_metric(geo, G), covariant=3),
        "nabla_J": geo.norm(covariant_acs(geo, G), covariant=2),
        "torsion_11": geo.norm(torsion_11_part(T, geo.J), covariant=2),
        "torsion_antilinear_plus_nijenhuis": geo.norm(torsion_antilinear_part(T, geo.J) + geo.nijenhuis, covariant=2),
        "levi_civita_nabla_g": geo.norm(covariant_metric(geo, geo.gamma), covariant=3),
    }


def nijenhuis_identity_residual(geo: LocalGeometry, X, Y) -> np.ndarray:
    """J(nabla_X J)Y - (nabla_JX J)Y - J(nabla_Y J)X + (nabla_JY J)X - 4 N(X, Y)."""
    A, J = geo.nabla_J, geo.J

    def nJ(Z):
        return np.einsum("i,ikj->kj", Z, A)

    lhs = J @ nJ(X) @ Y - nJ(J @ X) @ Y - J @ nJ(Y) @ X + nJ(J @ Y) @ X
    return lhs - 4 * np.einsum("kij,i,j->k", geo.nijenhuis, X, Y)


# -- classification ------------------------------------------------------------

CLASS_NAMES = ("kaehler", "almost_kaehler", "nearly_kaehler", "quasi_kaehler", "semi_kaehler", "hermitian")


@dataclass(frozen=True)
class ClassificationFlags:
    kaehler: bool
    almost_kaehler: bool
    nearly_kaehler: bool
    quasi_kaehler: bool
    semi_kaehler: bool
    hermitian: bool
    residuals: dict
    tol: float
    sample_count: int

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in CLASS_NAMES}

    def violations(self) -> list[str]:
        f = self.as_dict()
        out = []
        implications = [
            ("kaehler", "almost_kaehler"),
            ("kaehler", "nearly_kaehler"),
            ("kaehler", "hermitian"),
            ("almost_kaehler", "quasi_kaehler"),
            ("nearly_kaehler", "quasi_kaehler"),
            ("quasi_kaehler", "semi_kaehler"),
        ]
        for a, b in implications:
            if f[a] and not f[b]:
                out.append(f"{a} => {b}")
        if f["kaehler"] != (f["hermitian"] and f["quasi_kaehler"]):
            out.append("K = H & QK")
        if f["kaehler"] != (f["almost_kaehler"] and f["nearly_kaehler"]):
            out.append("K = AK & NK")
        return out


def class_residuals(geo: LocalGeometry) -> dict:
    A, J = geo.nabla_J, geo.J
    # tensors in (k, i, j) layout: value at (X=d_i, Y=d_j)
    nj = np.einsum("ikj->kij", A)
    nk = nj + np.swapaxes(nj, 1, 2)
    qk = nj + np.einsum("ai,akb,bj->kij", J, A, J)
    return {
        "kaehler": geo.norm(nj, covariant=2),
        "almost_kaehler": geo.norm(geo.d_omega, covariant=3),
        "nearly_kaehler": geo.norm(nk, covariant=2),
        "quasi_kaehler": geo.norm(qk, covariant=2),
        "semi_kaehler": geo.vector_norm(geo.delta_J),
        "hermitian": geo.norm(geo.nijenhuis, covariant=2),
    }


def classify(chart: Chart, sample_points, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6) -> ClassificationFlags:
    """Sample-based class membership; raises if the flags break the inclusion chain."""
    worst = {name: 0.0 for name in CLASS_NAMES}
    pts = np.atleast_2d(sample_points)
    for p in pts:
        res = class_residuals(local_geometry(chart, p, cfg))
        for k, v in res.items():
            worst[k] = max(worst[k], v)
    flags = ClassificationFlags(**{k: worst[k] <= tol for k in CLASS_NAMES}, residuals=worst, tol=tol, sample_count=len(pts))
    bad = flags.violations()
    if bad:
        raise ClassificationInconsistencyError(f"{chart.name}: flags violate {', '.join(bad)}; residuals {worst}", flags)
    return flags


# -- curvature ------------------------------------------------------------------


def riemann_tensor(chart: Chart, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """R[l, k, i, j] with R(d_i, d_j) d_k = R^l_kij d_l, from differences of Levi-Civita coefficients."""
    p = chart.check_point(p)
    step_cfg = cfg if chart.d_metric is not None else cfg.outer()
    dG = gradient(lambda q: np.stack([local_geometry(chart, x, cfg).gamma for x in np.atleast_2d(q)]).reshape(
        np.shape(q)[:-1] + (chart.dim,) * 3), p, step_cfg, chart.contains)  # (i, l, j, k) = d_i Gamma^l_jk
    G = local_geometry(chart, p, cfg).gamma
    dGi = np.einsum("iljk->lkij", dG)  # d_i Gamma^l_jk placed at [l, k, i, j]
    return (
        dGi
        - np.swapaxes(dGi, 2, 3)
        + np.einsum("lim,mjk->lkij", G, G)
        - np.einsum("ljm,mik->lkij", G, G)
    )


def sectional_curvature(chart: Chart, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, _riemann=None) -> float:
    """g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - <X,Y>^2)."""
    R = riemann_tensor(chart, p, cfg) if _riemann is None else _riemann
    g = chart.metric_at(p)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    RXYY = np.einsum("lkij,i,j,k->l", R, X, Y, Y)
    area = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(RXYY @ g @ X / area)
