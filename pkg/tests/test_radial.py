import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from pluriharm.differentiation import DifferentiationConfig
from pluriharm.errors import ConfigError, DomainViolationError
from pluriharm.radial import (
    CASES,
    DEFAULT_CASE_PARAMS,
    WeightFunction,
    build_radial_model,
    case_lower_bound,
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

CFG = DifferentiationConfig()


def model(case, m=2, **params):
    return build_radial_model(m, case, params or DEFAULT_CASE_PARAMS[case])


def ode_ratio(K, radii):
    """psi'/psi from an adaptive scipy solve of psi'' = -K psi (independent of the RK4 tables)."""
    sol = solve_ivp(lambda t, v: [v[1], -K(t) * v[0]], (0, max(radii)), [0.0, 1.0],
                    t_eval=radii, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.y[1] / sol.y[0]


def test_euclidean_hessian_spectrum():
    mdl = model("i")
    for r in (0.3, 1.0, 2.5):
        p = r * np.array([1.0, 2.0, -1.0, 0.5]) / np.linalg.norm([1.0, 2.0, -1.0, 0.5])
        ev = metric_eigenvalues(hess_r(mdl, p, CFG), mdl.chart.metric_at(p))
        assert np.max(np.abs(ev - [0, 1 / r, 1 / r, 1 / r])) <= 1e-7


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_hyperbolic_nonradial_eigenvalues(beta):
    mdl = model("iv", beta=beta)
    for r in (0.2, 1.0, 2.0):
        p = r * np.array([0.0, 1.0, 0.0, 0.0])
        ev = metric_eigenvalues(hess_r(mdl, p, CFG), mdl.chart.metric_at(p))
        assert abs(ev[0]) <= 1e-7
        assert np.max(np.abs(ev[1:] - beta / np.tanh(beta * r))) <= 1e-7


def test_power_case_eigenvalues_against_ode_oracle():
    mdl = model("v", a=1.0)
    A = power_exponent(1.0)
    radii = np.linspace(0.2, 4.0, 20)
    oracle = ode_ratio(lambda t: -1.0 / (1 + t * t), radii)
    for r, h in zip(radii, oracle):
        p = r * np.array([0.5, 0.5, 0.5, 0.5])
        ev = metric_eigenvalues(hess_r(mdl, p, CFG), mdl.chart.metric_at(p))
        assert np.max(np.abs(ev[1:] - h)) <= 1e-6
        assert ev[1] >= max(A / (1 + r), 1 / r) - 1e-7


def test_borderline_positive_curvature_against_ode_oracle():
    mdl = model("ii", b=0.5)
    radii = np.linspace(0.2, 4.0, 15)
    oracle = ode_ratio(lambda t: 0.25 / (1 + t * t), radii)
    assert np.max(np.abs(mdl.nonradial_eigenvalue(radii) - oracle)) <= 1e-8
    for row in comparison_check(mdl, radii, CFG):
        assert row.nonradial_min >= 1 / (2 * row.r) - 1e-6


def test_hessian_singular_at_pole():
    with pytest.raises(DomainViolationError):
        hess_r(model("i"), np.zeros(4), CFG)


def test_euclidean_margins_vanish():
    for row in comparison_check(model("i"), [0.25, 0.5, 1.0, 2.0, 4.0], CFG):
        assert abs(row.margin) <= 1e-7 and row.closed_form_residual <= 1e-7


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("m", [2, 3])
def test_comparison_margins_nonnegative(case, m):
    mdl = model(case, m)
    rows = comparison_check(mdl, np.linspace(0.2, 4.0, 12), CFG)
    assert min(r.margin for r in rows) >= -1e-6
    assert max(r.closed_form_residual for r in rows) <= 1e-6


@pytest.mark.parametrize("case", CASES)
def test_riccati_consistency(case):
    mdl = model(case)
    radii = np.linspace(0.05, 5.0, 50)
    assert riccati_residual(mdl, radii) <= 1e-7
    assert abs(mdl.warping.psi(1e-6) - 1e-6) <= 1e-12
    assert abs(mdl.warping.dpsi(0.0) - 1) <= 1e-9


@pytest.mark.parametrize("case,params", [
    ("ii", {"b": 0.6}), ("iii", {"B": 2.0, "eps": 1.0}), ("iii", {"B": 0.5, "eps": 0.0}),
    ("iv", {"beta": 0.0}), ("v", {"a": -1.0}),
])
def test_out_of_range_parameters(case, params):
    with pytest.raises(ConfigError):
        build_radial_model(2, case, params)


def test_unknown_case():
    with pytest.raises(ConfigError):
        case_lower_bound("vi", {}, 1.0)
    with pytest.raises(ConfigError):
        half_r_squared_constant("iv", {"beta": 1.0}, 2)


def test_euclidean_half_r_squared_equality():
    mdl = model("i")
    for m in (2, 3):
        mdl = model("i", m)
        for r in (0.3, 1.0, 3.0):
            p = np.zeros(2 * m)
            p[0] = r
            s, bound, eigs = eigen_pair_sum(mdl, WeightFunction("half_r_squared"), p, CFG)
            assert np.max(np.abs(eigs - 1)) <= 1e-7
            assert abs(s - 2 * (m - 1)) <= 1e-7 and bound == 2 * (m - 1)


def test_hyperbolic_cosh_equality():
    mdl = model("iv", beta=1.0)
    for r in (0.3, 1.0, 2.0):
        p = np.array([0.0, 0.0, r, 0.0])
        s, bound, eigs = eigen_pair_sum(mdl, WeightFunction("cosh_beta_r", beta=1.0), p, CFG)
        assert np.max(np.abs(eigs - np.cosh(r))) <= 1e-7
        assert abs(s - bound) <= 1e-7 and abs(bound - 2 * np.cosh(r)) <= 1e-12


def test_power_weight_small_radius_branch():
    mdl = model("v", a=1.0)
    A = power_exponent(1.0)
    assert abs(A - (1 + np.sqrt(5)) / 2) <= 1e-15
    for r in (0.3, 0.8, 1.2):
        assert A * r / (1 + r) < 1
        p = np.array([r, 0.0, 0.0, 0.0])
        s, bound, _ = eigen_pair_sum(mdl, WeightFunction("power_A", A=A), p, CFG)
        assert s >= A * (1 + r) ** (A - 1) + (1 + r) ** A / r - 1e-6
        assert s >= bound - 1e-7


@pytest.mark.parametrize("case,kind", [
    ("i", "half_r_squared"), ("ii", "half_r_squared"), ("iii", "half_r_squared"),
    ("iv", "cosh_beta_r"), ("iv", "power_A"), ("v", "power_A"),
])
def test_branch_formula_and_bound(case, kind):
    mdl = model(case)
    A = power_exponent(mdl.params.get("a", 1.0))
    w = WeightFunction(kind, beta=mdl.params.get("beta", 1.0), A=A)
    for r in np.linspace(0.2, 3.0, 8):
        p = r * np.array([0.6, 0.0, 0.0, 0.8])
        s, bound, eigs = eigen_pair_sum(mdl, w, p, CFG)
        h = float(mdl.nonradial_eigenvalue(r))
        assert abs(s - convex_weight_branch(w.d1(r), w.d2(r), h, 2)) <= 1e-7 * max(1.0, abs(s))
        assert s >= bound - 1e-7 * max(1.0, abs(bound))


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=6, max_size=6))
def test_pair_sum_definition(values):
    e = np.sort(values)
    m = 3
    assert abs(pair_sum(np.array(values), m) - (e.sum() - e[m - 1] - e[2 * m - 1])) <= 1e-12 * max(1.0, np.abs(e).sum())


@pytest.mark.parametrize("kind", ["half_r_squared", "cosh_beta_r", "power_A"])
def test_weights_are_nondecreasing_and_convex(kind):
    w = WeightFunction(kind, beta=1.3, A=power_exponent(0.7))
    r = np.linspace(1e-3, 6.0, 200)
    assert np.all(w.d1(r) >= 0) and np.all(w.d2(r) > 0)


def test_case_two_constant_variants():
    assert half_r_squared_constant("ii", {"b": 0.0}, 2, "lemma") == 2.0
    assert half_r_squared_constant("ii", {"b": 0.0}, 2, "theorem") == 0.0
    assert half_r_squared_constant("ii", {"b": 0.5}, 2, "lemma") == half_r_squared_constant("ii", {"b": 0.5}, 2, "theorem")
