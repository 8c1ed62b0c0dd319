"""Stress-energy tensors of u^{-1}TN-valued 1-forms, their divergence identity,
the closedness/coclosedness identities for sigma, and the eigenvalue lower bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .differentiation import DEFAULT_CONFIG, DifferentiationConfig, gradient
from .errors import ConfigError, PreconditionError
from .geometry import hermitian_frame, local_geometry
from .maps import SmoothMap, defect_tensor, jet, split

TAGS = ("du", "sigma", "sigma_prime", "custom")


@dataclass(frozen=True, eq=False)
class VectorValuedOneForm:
    """A section omega of T*M (x) u^{-1}TN; ``eval`` maps (..., 2m) points to (..., 2n, 2m)."""

    base_map: SmoothMap
    eval: Callable
    tag: str = "custom"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigError(f"unknown one-form tag {self.tag!r}")

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.eval(self.base_map.domain.check_point(p)), dtype=float)

    @property
    def has_exact_jet(self) -> bool:
        return self.base_map.exact_jacobian is not None


def _pullback_split(u: SmoothMap, which: int):
    def ev(x):
        du = u.jacobian(x)
        parts = split(du, u.domain.acs(x), u.target.acs(u.components(x)))
        return parts[which]

    return ev


def one_form(u: SmoothMap, tag: str = "du") -> VectorValuedOneForm:
    """du, sigma (anti-holomorphic part) or sigma' of ``u`` as a one-form."""
    if tag == "du":
        return VectorValuedOneForm(u, u.jacobian, "du")
    if tag == "sigma":
        return VectorValuedOneForm(u, _pullback_split(u, 0), "sigma")
    if tag == "sigma_prime":
        return VectorValuedOneForm(u, _pullback_split(u, 1), "sigma_prime")
    raise ConfigError(f"one_form builds du/sigma/sigma_prime, got {tag!r}")


@dataclass(frozen=True)
class StressTensor:
    """S = 1/2 |omega|^2 g - omega (.) omega at one point, with the data it came from."""

    s: np.ndarray
    norm2: float
    g: np.ndarray

    def trace(self) -> float:
        return float(np.einsum("ij,ij->", np.linalg.inv(self.g), self.s))

    def __call__(self, X, Y) -> float:
        return float(np.asarray(X) @ self.s @ np.asarray(Y))


def _stress_field(omega: VectorValuedOneForm):
    """Batch S_omega(x) together with |omega|^2(x)."""
    u = omega.base_map

    def field(x):
        w = omega.eval(x)
        g = u.domain.metric(x)
        h = u.target.metric(u.components(x))
        ginv = np.linalg.inv(g)
        wh = np.einsum("...ab,...ai,...bj->...ij", h, w, w)
        n2 = np.einsum("...ij,...ij->...", ginv, wh)
        return 0.5 * n2[..., None, None] * g - wh, n2

    return field


def stress_tensor(omega: VectorValuedOneForm, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> StressTensor:
    p = omega.base_map.domain.check_point(p)
    s, n2 = _stress_field(omega)(p)
    return StressTensor(s=s, norm2=float(n2), g=omega.base_map.domain.metric(p))


def _derivative_cfg(omega: VectorValuedOneForm, cfg: DifferentiationConfig) -> DifferentiationConfig:
    # omega built from finite-difference Jacobians needs the wider nested step
    return cfg if omega.has_exact_jet else cfg.outer()


def covariant_derivative(omega: VectorValuedOneForm, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """(nabla^u_k omega)^g_i with the pull-back of the target Levi-Civita connection."""
    u = omega.base_map
    p = u.domain.check_point(p)
    dw = gradient(omega.eval, p, _derivative_cfg(omega, cfg), u.domain.contains)  # (k, g, i)
    w = omega.eval(p)
    j = jet(u, p, cfg)
    return (
        dw
        + np.einsum("gab,ak,bi->kgi", j.tgt.gamma, j.jac, w)
        - np.einsum("lki,gl->kgi", j.dom.gamma, w)
    )


def form_derivatives(omega: VectorValuedOneForm, p, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    """(d omega[g, k, l], delta omega[g]) with d omega(X,Y) = nabla_X omega(Y) - nabla_Y omega(X)
    and delta omega = -trace nabla omega."""
    u = omega.base_map
    p = u.domain.check_point(p)
    Dw = covariant_derivative(omega, p, cfg)
    d = np.einsum("kgl->gkl", Dw) - np.einsum("lgk->gkl", Dw)
    ginv = u.domain.inverse_metric(p)
    delta = -np.einsum("ki,kgi->g", ginv, Dw)
    return d, delta


def stress_divergence(omega: VectorValuedOneForm, p, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> np.ndarray:
    """(div S)_k = g^{ij} (nabla_i S)_{jk}, from finite differences of the S field."""
    u = omega.base_map
    p = u.domain.check_point(p)
    field = _stress_field(omega)
    dS = gradient(lambda x: field(x)[0], p, _derivative_cfg(omega, cfg), u.domain.contains)  # (i, j, k)
    S = field(p)[0]
    geo = local_geometry(u.domain, p, cfg)
    G = geo.gamma
    DS = dS - np.einsum("lij,lk->ijk", G, S) - np.einsum("lik,jl->ijk", G, S)
    return np.einsum("ij,ijk->k", geo.ginv, DS)


def lemma_d_sides(omega: VectorValuedOneForm, p, X, cfg: DifferentiationConfig = DEFAULT_CONFIG):
    """(div S(X), <delta omega, i_X omega> + <i_X d omega, omega>), each side on its own path."""
    u = omega.base_map
    p = u.domain.check_point(p)
    X = np.asarray(X, dtype=float)
    lhs = float(stress_divergence(omega, p, cfg) @ X)
    d, delta = form_derivatives(omega, p, cfg)
    w = omega.eval(p)
    h = u.target.metric(u.components(p))
    ginv = u.domain.inverse_metric(p)
    rhs = float(delta @ h @ (w @ X) + np.einsum("ij,ab,k,aki,bj->", ginv, h, X, d, w))
    return lhs, rhs


def lemma_d_residual(omega: VectorValuedOneForm, p, X, cfg: DifferentiationConfig = DEFAULT_CONFIG) -> float:
    lhs, rhs = lemma_d_sides(omega, p, X, cfg)
    return abs(lhs - rhs)


def _require_pluriharmonic_kaehler(u: SmoothMap, p, cfg, tol):
    j = jet(u, p, cfg)
    nj = j.tgt.norm(np.einsum("ikj->kij", j.tgt.nabla_J), covariant=2)
    if nj > tol:
        raise PreconditionError(f"target {u.target.name} is not Kaehler: |nabla J^N| = {nj:.3e}", nj)
    P = defect_tensor(j)
    defect = float(np.max(np.abs(P)))
    if defect > tol:
        raise PreconditionError(f"{u.name} is not Hermitian pluriharmonic at {p}: defect {defect:.3e}", defect)
    return j


def sigma_codifferential_residual(u: SmoothMap, p, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6) -> float:
    """|delta sigma - sigma(V)| for a Hermitian pluriharmonic map into a Kaehler target."""
    j = _require_pluriharmonic_kaehler(u, p, cfg, tol)
    sigma = one_form(u, "sigma")
    _, delta = form_derivatives(sigma, j.p, cfg)
    return j.tgt.vector_norm(delta - sigma.eval(j.p) @ j.dom.V)


def lemma_c_residual(u: SmoothMap, p, X, Y, cfg: DifferentiationConfig = DEFAULT_CONFIG, tol: float = 1e-6) -> float:
    """|d sigma(X,Y) - J^N du(N_J(X,Y))| for a Hermitian pluriharmonic map into a Kaehler target."""
    j = _require_pluriharmonic_kaehler(u, p, cfg, tol)
    d, _ = form_derivatives(one_form(u, "sigma"), j.p, cfg)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    lhs = np.einsum("gkl,k,l->g", d, X, Y)
    rhs = j.tgt.J @ j.jac @ np.einsum("kij,i,j->k", j.dom.nijenhuis, X, Y)
    return j.tgt.vector_norm(lhs - rhs)


# -- eigenvalue lower bound -------------------------------------------------------------


@dataclass(frozen=True)
class JAdaptedForm:
    """Symmetric form H with a g-orthonormal eigenbasis {e_1..e_m, Je_1..Je_m}.

    ``frame`` holds that basis as columns in the same order; ``eigenvalues``
    are sorted ascending, so e_i carries lambda_i and Je_i carries lambda_{m+i}."""

    H: np.ndarray
    frame: np.ndarray
    eigenvalues: np.ndarray


def j_adapted_form(g: np.ndarray, J: np.ndarray, eigenvalues, rng: Optional[np.random.Generator] = None) -> JAdaptedForm:
    """Build H = sum_A lambda_A (E^T g)_A (x) (E^T g)_A on a (random) J-adapted frame E."""
    n = g.shape[0]
    m = n // 2
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    if lam.size != n:
        raise ConfigError(f"need {n} eigenvalues, got {lam.size}")
    if rng is None:
        E = hermitian_frame(g, J)
    else:
        # random unitary rotation of the standard adapted frame
        E0 = hermitian_frame(g, J)
        Z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        Q, R = np.linalg.qr(Z)
        Q = Q * (np.diag(R) / np.abs(np.diag(R)))
        e = E0[:, :m] @ Q.real + E0[:, m:] @ Q.imag
        E = np.concatenate([e, J @ e], axis=1)
    L = g @ E  # covector of each frame vector
    H = np.einsum("A,iA,jA->ij", lam, L, L)
    return JAdaptedForm(H=0.5 * (H + H.T), frame=E, eigenvalues=lam)


def _validate_adapted(form: JAdaptedForm, g: np.ndarray, J: np.ndarray, tol: float = 1e-9):
    E, lam = form.frame, form.eigenvalues
    m = E.shape[1] // 2
    ortho = np.max(np.abs(E.T @ g @ E - np.eye(2 * m)))
    paired = np.max(np.abs(J @ E[:, :m] - E[:, m:]))
    diag = np.max(np.abs(E.T @ form.H @ E - np.diag(lam)))
    sorted_ok = np.all(np.diff(lam) >= 0)
    if max(ortho, paired, diag) > tol or not sorted_ok:
        raise PreconditionError(
            "H is not presented in a sorted J-adapted orthonormal eigenbasis",
            {"orthonormality": ortho, "pairing": paired, "diagonal": diag},
        )


def pair_sum_bound(eigenvalues) -> float:
    """sum_{i=1}^{m-1} (lambda_i + lambda_{m+i}) over sorted eigenvalues."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    m = lam.size // 2
    return float(np.sum(lam[: m - 1]) + np.sum(lam[m : 2 * m - 1]))


def stress_pairing(sigma: np.ndarray, H: np.ndarray, g: np.ndarray, h: np.ndarray) -> float:
    """<S_sigma, H> = g^{ia} g^{jb} S_ij H_ab."""
    ginv = np.linalg.inv(g)
    wh = sigma.T @ h @ sigma
    n2 = np.einsum("ij,ij->", ginv, wh)
    S = 0.5 * n2 * g - wh
    return float(np.einsum("ia,jb,ij,ab->", ginv, ginv, S, H))


def stress_lower_bound(sigma: np.ndarray, form: JAdaptedForm, g: np.ndarray, J: np.ndarray, h: np.ndarray):
    """(lhs, bound) = (<S_sigma, H>, sum_{i<m} (lambda_i + lambda_{m+i}) |delbar u|^2)."""
    _validate_adapted(form, g, J)
    lhs = stress_pairing(sigma, form.H, g, h)
    delbar2 = 0.5 * float(np.einsum("ij,ab,ai,bj->", np.linalg.inv(g), h, sigma, sigma))
    return lhs, pair_sum_bound(form.eigenvalues) * delbar2


def random_sigma(J: np.ndarray, JN: np.ndarray, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random sigma with sigma J = -J^N sigma."""
    M = rng.normal(size=(JN.shape[0], J.shape[0])) * scale
    return 0.5 * (M + JN @ M @ J)


@dataclass
class BoundSweep:
    trials: int
    violations: int
    worst_margin: float
    equality_residual: float


def lower_bound_sweep(m: int = 2, trials: int = 1000, seed: int = 0, tol: float = 1e-10) -> BoundSweep:
    """Monte Carlo over random metrics, J-adapted H with sorted eigenvalues and sigma.

    Each trial uses a random g (J made compatible), target metric and sigma;
    also records the H = g equality residual |<S, g> - 2(m-1)|delbar u|^2|."""
    from .radial import compatible_acs, standard_acs

    root = np.random.default_rng(seed)
    n = 2 * m
    J0 = standard_acs(m)
    violations = 0
    worst = np.inf
    eq_res = 0.0
    for seed_t in root.integers(0, 2**63 - 1, size=trials):
        rng = np.random.default_rng(seed_t)
        A = rng.normal(size=(n, n)) * 0.3
        g = np.eye(n) + A @ A.T
        J = compatible_acs(g, J0)
        B = rng.normal(size=(n, n)) * 0.3
        h = np.eye(n) + B @ B.T
        JN = compatible_acs(h, J0)
        sigma = random_sigma(J, JN, rng)
        form = j_adapted_form(g, J, rng.normal(size=n) * 2, rng)
        lhs, bound = stress_lower_bound(sigma, form, g, J, h)
        margin = lhs - bound
        worst = min(worst, margin)
        if margin < -tol * max(1.0, abs(bound)):
            violations += 1
        unit = j_adapted_form(g, J, np.ones(n))
        l1, b1 = stress_lower_bound(sigma, unit, g, J, h)
        eq_res = max(eq_res, abs(l1 - b1))
    return BoundSweep(trials=trials, violations=violations, worst_margin=float(worst), equality_residual=eq_res)


@dataclass
class ViolationSearch:
    trials: int
    violations: int
    worst_margin: float
    witness: Optional[dict]


def general_form_violation_search(m: int = 2, trials: int = 1000, seed: int = 0) -> ViolationSearch:
    """Same bound with arbitrary symmetric H (no J-adapted eigenbasis); counterexamples are reported, not asserted."""
    from .radial import standard_acs

    root = np.random.default_rng(seed)
    n = 2 * m
    g, J = np.eye(n), standard_acs(m)
    count = 0
    worst, witness = np.inf, None
    for seed_t in root.integers(0, 2**63 - 1, size=trials):
        rng = np.random.default_rng(seed_t)
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        lam = rng.uniform(0, 1, size=n)
        H = Q @ np.diag(lam) @ Q.T
        sigma = random_sigma(J, J, rng)
        lhs = stress_pairing(sigma, H, g, g)
        bound = pair_sum_bound(lam) * 0.5 * float(np.sum(sigma * sigma))
        margin = lhs - bound
        if margin < -1e-10:
            count += 1
        if margin < worst:
            worst = margin
            witness = {"H": H.tolist(), "sigma": sigma.tolist(), "lhs": lhs, "bound": bound}
    return ViolationSearch(trials=trials, violations=count, worst_margin=float(worst), witness=witness)


def explicit_counterexample(m: int = 2):
    """H = projection onto span{e1, Je1}, sigma supported on e1: <S, H> = 0 < bound."""
    from .radial import standard_acs

    n = 2 * m
    g, J = np.eye(n), standard_acs(m)
    H = np.zeros((n, n))
    H[0, 0] = H[1, 1] = 1.0
    sigma = np.zeros((n, n))
    sigma[:, 0] = np.eye(n)[0]
    sigma[:, 1] = -J @ sigma[:, 0]
    lhs = stress_pairing(sigma, H, g, g)
    bound = pair_sum_bound(np.linalg.eigvalsh(H)) * 0.5 * float(np.sum(sigma * sigma))
    return lhs, bound
