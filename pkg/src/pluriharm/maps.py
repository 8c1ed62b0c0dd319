"""Smooth maps between charts and the tensors built from them.

Array layouts: ``du[g, i]`` = du^gamma_i, ``hess[g, i, j]`` = d_i d_j u^gamma,
second fundamental forms ``B[g, i, j]`` = (nabla du)(d_i, d_j)^gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .charts import Chart
from .differentiation import DEFAULT_CONFIG, DifferentiationConfig, gradient, hessian as fd_hessian
from .errors import DomainViolationError, PreconditionError
from .geometry import LocalGeometry, local_geometry

HOLOMORPHIC = "holomorphic"
ANTI_HOLOMORPHIC = "anti_holomorphic"
GENERIC = "generic"


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """u : domain -> target in coordinates.  ``components`` is batch-capable.

    ``exact_jacobian`` returns (..., 2n, 2m); ``exact_hessian`` (..., 2n, 2m, 2m).
    ``holomorphy`` is a declaration only; it is re-verified where it matters.
    """

    name: str
    domain: Chart
    target: Chart
    components: Callable
    exact_jacobian: Optional[Callable] = None
    exact_hessian: Optional[Callable] = None
    holomorphy: str = GENERIC

    def __call__(self, p):
        y = np.asarray(self.components(p), dtype=float)
        if not np.all(self.target.contains(y)):
            raise DomainViolationError(f"{self.name}: image {y} of {p} leaves the target domain")
        return y

    def jacobian(self, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
        p = self.domain.check_point(p)
        if self.exact_jacobian is not None:
            return np.asarray(self.exact_jacobian(p), dtype=float)
        d = gradient(self.components, p, cfg, self.domain.contains)  # (..., i, g)
        return np.swapaxes(d, -1, -2)

    def second_derivatives(self, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
        p = self.domain.check_point(p)
        if self.exact_hessian is not None:
            return np.asarray(self.exact_hessian(p), dtype=float)
        if self.exact_jacobian is not None:
            d = gradient(self.exact_jacobian, p, cfg, self.domain.contains)  # (i, g, j)
            return np.einsum("igj->gij", d)
        return np.einsum("ijg->gij", fd_hessian(self.components, p, cfg, self.domain.contains))


@dataclass
class MapJet:
    """Everything needed about u at one point, with both charts' geometry."""

    u: SmoothMap
    p: np.ndarray
    cfg: DifferentiationConfig
    dom: LocalGeometry
    tgt: LocalGeometry
    jac: np.ndarray
    hess: np.ndarray


def jet(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> MapJet:
    p = u.domain.check_point(p)
    y = u(p)
    return MapJet(
        u=u,
        p=p,
        cfg=cfg,
        dom=local_geometry(u.domain, p, cfg),
        tgt=local_geometry(u.target, y, cfg),
        jac=u.jacobian(p, cfg),
        hess=u.second_derivatives(p, cfg),
    )


def differential(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    return u.jacobian(p, cfg)


def split(du: np.ndarray, J: np.ndarray, JN: np.ndarray):
    """sigma = (du + J^N du J)/2, sigma' = (du - J^N du J)/2 (batch-capable)."""
    rot = JN @ du @ J
    return 0.5 * (du + rot), 0.5 * (du - rot)


def sigma_split(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    p = u.domain.check_point(p)
    return split(u.jacobian(p, cfg), u.domain.acs(p), u.target.acs(u(p)))


def form_norm2(w: np.ndarray, ginv: np.ndarray, h: np.ndarray) -> np.ndarray:
    """|w|^2 = g^{ij} h_ab w^a_i w^b_j for target-valued 1-forms (batch-capable)."""
    wh = np.swapaxes(w, -1, -2) @ (h @ w)
    return np.sum(ginv * wh, axis=(-2, -1))


def energy_densities(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    """(e, |del u|^2, |delbar u|^2) with |sigma|^2 = 2|delbar u|^2 and |sigma'|^2 = 2|del u|^2.

    Accepts a batch of points."""
    p = u.domain.check_point(p)
    y = u(p)
    du = u.jacobian(p, cfg)
    g = u.domain.metric(p)
    ginv = np.linalg.inv(g)
    h = u.target.metric(y)
    s, sp = split(du, u.domain.acs(p), u.target.acs(y))
    e_delbar = 0.5 * form_norm2(s, ginv, h)
    e_del = 0.5 * form_norm2(sp, ginv, h)
    return e_del + e_delbar, e_del, e_delbar


def delbar_energy_density(u: SmoothMap, points, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    return energy_densities(u, points, cfg)[2]


def _second_fundamental_form(j: MapJet, gamma_dom: np.ndarray, gamma_tgt: np.ndarray) -> np.ndarray:
    du = j.jac
    return j.hess + np.einsum("gab,ai,bj->gij", gamma_tgt, du, du) - np.einsum("kij,gk->gij", gamma_dom, du)


def hessian_levi_civita(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, _jet: MapJet = None) -> np.ndarray:
    j = _jet or jet(u, p, cfg)
    return _second_fundamental_form(j, j.dom.gamma, j.tgt.gamma)


def hessian_second_canonical(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, _jet: MapJet = None) -> np.ndarray:
    """nabla~ du(X, Y) = nabla~^N_{du X} du Y - du(nabla~_X Y); not symmetric."""
    j = _jet or jet(u, p, cfg)
    return _second_fundamental_form(j, j.dom.gamma_canonical, j.tgt.gamma_canonical)


def torsion_contraction(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, _jet: MapJet = None) -> np.ndarray:
    """T^N(du X, du Y) - du(T(X, Y)): the antisymmetric part of nabla~ du, assembled from torsions."""
    j = _jet or jet(u, p, cfg)
    Gd, Gt = j.dom.gamma_canonical, j.tgt.gamma_canonical
    Td = Gd - np.swapaxes(Gd, 1, 2)
    Tt = Gt - np.swapaxes(Gt, 1, 2)
    return np.einsum("gab,ai,bj->gij", Tt, j.jac, j.jac) - np.einsum("kij,gk->gij", Td, j.jac)


def _bilinear(B, X, Y):
    return np.einsum("gij,i,j->g", B, X, Y)


def pluriharmonic_defect(u: SmoothMap, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, _jet: MapJet = None) -> np.ndarray:
    """nabla~ du(X, Y) + nabla~ du(JX, JY)."""
    j = _jet or jet(u, p, cfg)
    B = hessian_second_canonical(u, p, cfg, j)
    J = j.dom.J
    return _bilinear(B, X, Y) + _bilinear(B, J @ X, J @ Y)


def defect_tensor(j: MapJet) -> np.ndarray:
    """P[g, i, j] = nabla~ du(d_i, d_j) + nabla~ du(J d_i, J d_j)."""
    B = _second_fundamental_form(j, j.dom.gamma_canonical, j.tgt.gamma_canonical)
    J = j.dom.J
    return B + np.einsum("gab,ai,bj->gij", B, J, J)


def target_norm(j: MapJet, v) -> float:
    return j.tgt.vector_norm(np.asarray(v))


def max_defect_norm(j: MapJet) -> float:
    """Frame norm of the defect tensor: the sup of |P(X,Y)|_h over unit X, Y is below it."""
    P = defect_tensor(j)
    E = j.dom.frame
    PE = np.einsum("gab,aA,bB->gAB", P, E, E)
    return float(np.sqrt(np.einsum("gAB,gh,hAB->", PE, j.tgt.g, PE)))


def theorem_A_identity_residual(u: SmoothMap, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6):
    """P(X,Y) - 2[du(N_J(X,Y)) - N_{J^N}(du X, du Y)] for a holomorphic u.

    Returns (residual vector, defect vector, bracket vector)."""
    j = jet(u, p, cfg)
    s, _ = split(j.jac, j.dom.J, j.tgt.J)
    sig = sigma_norm(j, s)
    if sig > tol:
        raise PreconditionError(f"{u.name} is not holomorphic at {p}: |sigma| = {sig:.3e}", sig)
    P = pluriharmonic_defect(u, p, X, Y, cfg, j)
    duX, duY = j.jac @ X, j.jac @ Y
    bracket = j.jac @ np.einsum("kij,i,j->k", j.dom.nijenhuis, X, Y) - np.einsum("kij,i,j->k", j.tgt.nijenhuis, duX, duY)
    return P - 2 * bracket, P, bracket


def sigma_norm(j: MapJet, s: np.ndarray) -> float:
    return float(np.sqrt(max(form_norm2(s, j.dom.ginv, j.tgt.g), 0.0)))


def alpha_tensor(chart: Chart, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, _geo: LocalGeometry = None) -> np.ndarray:
    """alpha(X,Y) = 1/2 J{(nabla_X J)Y + (nabla_JX J)JY + (nabla_Y J)X + (nabla_JY J)JX}."""
    geo = _geo or local_geometry(chart, p, cfg)
    A, J = geo.nabla_J, geo.J

    def nJ(Z):
        return np.einsum("i,ikj->kj", Z, A)

    inner = nJ(X) @ Y + nJ(J @ X) @ (J @ Y) + nJ(Y) @ X + nJ(J @ Y) @ (J @ X)
    return 0.5 * J @ inner


def _require_kaehler_target(j: MapJet, tol: float):
    res = j.tgt.norm(np.einsum("ikj->kij", j.tgt.nabla_J), covariant=2)
    if res > tol:
        raise PreconditionError(f"target {j.u.target.name} is not Kaehler at u(p): |nabla J^N| = {res:.3e}", res)


def prop41_equivalence_residual(u: SmoothMap, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6):
    """[nabla~du(X,Y) + nabla~du(JX,JY)] - [nabla du(X,Y) + nabla du(JX,JY) + du(alpha(X,Y))]."""
    j = jet(u, p, cfg)
    _require_kaehler_target(j, tol)
    lhs = pluriharmonic_defect(u, p, X, Y, cfg, j)
    B = hessian_levi_civita(u, p, cfg, j)
    J = j.dom.J
    rhs = _bilinear(B, X, Y) + _bilinear(B, J @ X, J @ Y) + j.jac @ alpha_tensor(u.domain, p, X, Y, cfg, j.dom)
    return lhs - rhs


def tension_fields(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, _jet: MapJet = None):
    """(tau, tau~): traces of nabla du and nabla~ du over the J-adapted frame."""
    j = _jet or jet(u, p, cfg)
    E = j.dom.frame
    B = hessian_levi_civita(u, p, cfg, j)
    Bt = hessian_second_canonical(u, p, cfg, j)
    return np.einsum("gij,iA,jA->g", B, E, E), np.einsum("gij,iA,jA->g", Bt, E, E)


def tension_shift_residual(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6) -> np.ndarray:
    """tau~ - tau - du(V) for maps into Kaehler targets."""
    j = jet(u, p, cfg)
    _require_kaehler_target(j, tol)
    tau, tau_t = tension_fields(u, p, cfg, j)
    return tau_t - tau - j.jac @ j.dom.V
