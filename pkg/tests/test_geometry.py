import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluriharm.charts import Chart, random_points
from pluriharm.differentiation import DifferentiationConfig, gradient
from pluriharm.errors import ClassificationInconsistencyError
from pluriharm.geometry import (
    ClassificationFlags,
    christoffel_levi_civita,
    class_residuals,
    classify,
    codifferential_J_and_V,
    connection_axiom_residuals,
    covariant_acs,
    fundamental_form_and_domega,
    hermitian_frame,
    local_geometry,
    nabla_J,
    nijenhuis,
    nijenhuis_identity_residual,
    riemann_tensor,
    second_canonical,
    sectional_curvature,
    torsion_11_part,
    torsion_antilinear_part,
)
from pluriharm.models import MODEL_SPECS, get_model
from pluriharm.radial import standard_acs

CFG = DifferentiationConfig()
ZOO = list(MODEL_SPECS)


def conformal_chart(f, scale=1.0):
    J0 = standard_acs(2)
    return Chart(
        "conformal_test", 2,
        lambda x: scale * np.exp(2 * f(np.asarray(x, dtype=float)))[..., None, None] * np.eye(4),
        lambda x: np.broadcast_to(J0, np.shape(x)[:-1] + (4, 4)),
        lambda x: np.linalg.norm(np.asarray(x), axis=-1) < 3,
    )


def wavy(x):
    return 0.3 * np.sin(x[..., 0]) + 0.2 * x[..., 1] * x[..., 2] - 0.1 * x[..., 3] ** 2


def wavy_gradient(x):
    return np.array([0.3 * np.cos(x[0]), 0.2 * x[2], 0.2 * x[1], -0.2 * x[3]])


def test_flat_christoffel_is_zero():
    G = christoffel_levi_civita(get_model("flat"), np.array([0.1, 0.2, 0.3, 0.4]), CFG)
    assert G.kind == "levi_civita"
    assert np.all(G.gamma == 0)


def test_conformal_christoffel_closed_form():
    chart = conformal_chart(wavy)
    p = np.array([0.3, -0.2, 0.5, 0.1])
    df = wavy_gradient(p)
    d = np.eye(4)
    ref = np.einsum("ki,j->kij", d, df) + np.einsum("kj,i->kij", d, df) - np.einsum("ij,k->kij", d, df)
    assert np.max(np.abs(christoffel_levi_civita(chart, p, CFG).gamma - ref)) <= 1e-7


def test_christoffel_scale_invariance():
    p = np.array([0.3, -0.2, 0.5, 0.1])
    a = christoffel_levi_civita(conformal_chart(wavy), p, CFG).gamma
    b = christoffel_levi_civita(conformal_chart(wavy, scale=7.5), p, CFG).gamma
    assert np.max(np.abs(a - b)) <= 1e-10


@pytest.mark.parametrize("name", ZOO)
def test_levi_civita_symmetric_and_second_canonical_not_symmetrised(name):
    chart = get_model(name)
    for p in random_points(chart, 5, np.random.default_rng(5)):
        G = christoffel_levi_civita(chart, p, CFG).gamma
        assert np.max(np.abs(G - np.swapaxes(G, 1, 2))) <= 1e-10
    if name == "perturbed":
        Gt = second_canonical(chart, p, CFG)
        assert Gt.kind == "second_canonical"
        assert np.max(np.abs(Gt.torsion())) > 1e-3


def test_flat_nabla_J_is_zero():
    assert np.all(nabla_J(get_model("flat"), np.array([0.5, 0.1, 0.2, 0.3]), CFG) == 0)


@pytest.mark.parametrize("name", ZOO)
def test_nabla_J_anticommutes_with_J(name):
    chart = get_model(name)
    for p in random_points(chart, 50, np.random.default_rng(8)):
        A = nabla_J(chart, p, CFG)
        J = chart.acs_at(p)
        assert np.max(np.abs(J @ A + A @ J)) <= 1e-8


@pytest.mark.parametrize("name", ["flat", "bergman"])
def test_kaehler_models_have_parallel_J(name):
    chart = get_model(name)
    for p in random_points(chart, 20, np.random.default_rng(9)):
        assert local_geometry(chart, p, CFG).norm(nabla_J(chart, p, CFG), covariant=2) <= 1e-7


def test_nabla_J_is_skew_adjoint():
    chart = get_model("perturbed")
    rng = np.random.default_rng(4)
    for p in random_points(chart, 20, rng):
        g = chart.metric_at(p)
        A = nabla_J(chart, p, CFG)
        X, Y, Z = rng.normal(size=(3, 4))
        AX = np.einsum("i,ikj->kj", X, A)
        assert abs((AX @ Y) @ g @ Z + Y @ g @ (AX @ Z)) <= 1e-8


def test_nijenhuis_vanishes_for_constant_J():
    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(2, 4))
    assert np.all(nijenhuis(get_model("flat"), np.zeros(4), X, Y, CFG) == 0)


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.lists(st.floats(-2, 2), min_size=4, max_size=4),
       st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(-3, 3))
def test_nijenhuis_bilinear_and_antisymmetric(x, y, z, c):
    chart = get_model("perturbed")
    p = np.array([0.1, 0.2, -0.1, 0.3])
    X, Y, Z = np.array(x), np.array(y), np.array(z)
    N = lambda a, b: nijenhuis(chart, p, a, b, CFG)  # noqa: E731
    scale = 1 + np.abs(X).max() * (np.abs(Y).max() + np.abs(Z).max())
    assert np.max(np.abs(N(X, X))) <= 1e-12 * scale
    assert np.max(np.abs(N(X, Y) + N(Y, X))) <= 1e-12 * scale
    assert np.max(np.abs(N(X, c * Y + Z) - c * N(X, Y) - N(X, Z))) <= 1e-11 * (1 + abs(c)) * scale


def _bracket(A, B, p, cfg):
    """[A, B] = dB(A) - dA(B) for vector fields given as functions of the point."""
    dA = gradient(A, p, cfg)  # (i, k): d_i A^k
    dB = gradient(B, p, cfg)
    return A(p) @ dB - B(p) @ dA


def test_nijenhuis_against_four_bracket_formula():
    chart = get_model("perturbed")
    p = np.array([0.1, 0.2, -0.1, 0.3])
    rng = np.random.default_rng(17)
    half = DifferentiationConfig(step=CFG.step / 2)
    J = chart.acs
    for _ in range(10):
        Xc, Yc = rng.normal(size=(2, 4))
        X = lambda q: Xc  # noqa: E731
        Y = lambda q: Yc  # noqa: E731
        JX = lambda q: J(q) @ Xc  # noqa: E731
        JY = lambda q: J(q) @ Yc  # noqa: E731
        Jp = J(p)
        four = _bracket(X, Y, p, half) + Jp @ _bracket(X, JY, p, half) + Jp @ _bracket(JX, Y, p, half) - _bracket(JX, JY, p, half)
        assert np.max(np.abs(nijenhuis(chart, p, Xc, Yc, CFG) - four / 4)) <= 1e-6


@pytest.mark.parametrize("name", ZOO)
def test_connection_axioms_and_identity(name):
    chart = get_model(name)
    rng = np.random.default_rng(21)
    for p in random_points(chart, 25, rng):
        res = connection_axiom_residuals(chart, p, CFG)
        assert max(res.values()) <= 1e-6, res
        X, Y = rng.normal(size=(2, 4))
        geo = local_geometry(chart, p, CFG)
        assert geo.vector_norm(nijenhuis_identity_residual(geo, X, Y)) <= 1e-6


def test_kaehler_second_canonical_equals_levi_civita():
    chart = get_model("bergman")
    for p in random_points(chart, 10, np.random.default_rng(2)):
        diff = second_canonical(chart, p, CFG).gamma - christoffel_levi_civita(chart, p, CFG).gamma
        assert np.max(np.abs(diff)) <= 1e-7


def test_torsion_projections_split_torsion():
    """J-invariant, complex-linear and anti-linear parts sum to the torsion; projections are idempotent."""
    rng = np.random.default_rng(3)
    J = standard_acs(2)
    T = rng.normal(size=(4, 4, 4))
    T = T - np.swapaxes(T, 1, 2)
    P11, P20 = torsion_11_part(T, J), torsion_antilinear_part(T, J)
    TJX = np.einsum("kaj,ai->kij", T, J)
    TJY = np.einsum("kia,aj->kij", T, J)
    TJJ = np.einsum("kab,ai,bj->kij", T, J, J)
    linear = 0.25 * (T - np.einsum("ka,aij->kij", J, TJX + TJY) - TJJ)
    assert np.max(np.abs(P11 + P20 + linear - T)) <= 1e-12
    assert np.max(np.abs(torsion_11_part(P11, J) - P11)) <= 1e-12
    assert np.max(np.abs(torsion_antilinear_part(P20, J) - P20)) <= 1e-12
    assert np.max(np.abs(torsion_11_part(P20, J))) <= 1e-12


def test_second_canonical_antilinear_torsion_is_minus_nijenhuis():
    chart = get_model("perturbed")
    p = np.array([0.1, 0.2, -0.1, 0.3])
    geo = local_geometry(chart, p, CFG)
    T = second_canonical(chart, p, CFG).torsion()
    assert np.max(np.abs(torsion_antilinear_part(T, geo.J) + geo.nijenhuis)) <= 1e-8
    assert np.max(np.abs(torsion_antilinear_part(T, geo.J))) > 1e-2


def test_V_vanishes_on_flat_and_kaehler():
    for name in ("flat", "bergman"):
        chart = get_model(name)
        for p in random_points(chart, 10, np.random.default_rng(6)):
            _, V = codifferential_J_and_V(chart, p, CFG)
            assert np.linalg.norm(V) <= 1e-7


def test_conformal_V_closed_form():
    chart = get_model("conformal")
    prof = chart.params["profile"]
    d = np.array([0.2, -0.4, 0.7, 0.5])
    d /= np.linalg.norm(d)
    for r in (0.95, 1.0, 1.3, 2.0, 5.0):
        _, V = codifferential_J_and_V(chart, r * d, CFG)
        ref = prof.V_vector_coefficient(r) * d
        assert np.linalg.norm(V - ref) <= 1e-5 * np.linalg.norm(ref)


def test_conformal_V_norm_is_coefficient_times_phi():
    chart = get_model("conformal")
    prof = chart.params["profile"]
    for r in (1.5, 3.0, 6.0):
        p = np.array([r, 0, 0, 0])
        _, V = codifferential_J_and_V(chart, p, CFG)
        vn = local_geometry(chart, p, CFG).vector_norm(V)
        assert abs(vn - prof.V_norm(r)) <= 1e-8
        assert vn <= prof.C
        assert abs(prof.stated_V_norm(r) - prof.C) <= 1e-12


def test_hermitian_frame_is_J_paired_and_orthonormal():
    chart = get_model("perturbed_push")
    p = random_points(chart, 1, np.random.default_rng(1))[0]
    g, J = chart.metric_at(p), chart.acs_at(p)
    E = hermitian_frame(g, J)
    assert np.max(np.abs(E.T @ g @ E - np.eye(4))) <= 1e-12
    assert np.max(np.abs(J @ E[:, :2] - E[:, 2:])) <= 1e-12


def test_fundamental_form_flat_and_antisymmetry():
    omega, domega = fundamental_form_and_domega(get_model("flat"), np.array([0.3, 0.1, 0.0, -0.2]), CFG)
    assert np.all(domega == 0)
    assert np.max(np.abs(omega + omega.T)) == 0
    for name in ZOO:
        chart = get_model(name)
        p = random_points(chart, 1, np.random.default_rng(0))[0]
        omega, domega = fundamental_form_and_domega(chart, p, CFG)
        assert np.max(np.abs(omega + omega.T)) <= 1e-12
        assert np.max(np.abs(domega + np.swapaxes(domega, 0, 1))) <= 1e-8
        assert np.max(np.abs(domega + np.swapaxes(domega, 1, 2))) <= 1e-8


def test_hopf_domega_nonzero_and_stable_under_refinement():
    chart = get_model("hopf")
    p = np.array([1.0, 0, 0, 0])
    _, coarse = fundamental_form_and_domega(chart, p, CFG)
    _, fine = fundamental_form_and_domega(chart, p, DifferentiationConfig("central4", 1e-3))
    assert np.max(np.abs(coarse)) > 0.1
    assert np.max(np.abs(coarse - fine)) <= 1e-6


def test_classification_examples():
    rng = np.random.default_rng(12)
    flat = classify(get_model("flat"), random_points(get_model("flat"), 5, rng), CFG)
    assert all(flat.as_dict().values())
    hopf = classify(get_model("hopf"), random_points(get_model("hopf"), 5, rng), CFG)
    assert hopf.hermitian and not hopf.kaehler
    pert = classify(get_model("perturbed"), random_points(get_model("perturbed"), 5, rng), CFG)
    assert not pert.hermitian and pert.residuals["hermitian"] > 100 * pert.tol


@pytest.mark.parametrize("name", ZOO)
def test_classification_consistent_with_declared_flags(name):
    chart = get_model(name)
    flags = classify(chart, random_points(chart, 6, np.random.default_rng(13)), CFG)
    assert flags.violations() == []
    for cls, expected in MODEL_SPECS[name].expected_flags.items():
        assert flags.as_dict()[cls] == expected


def test_inconsistent_flags_are_reported():
    flags = ClassificationFlags(True, True, True, True, True, False, {}, 1e-6, 1)
    assert "kaehler => hermitian" in flags.violations()


def test_classify_raises_on_inconsistent_residuals(monkeypatch):
    import pluriharm.geometry as geometry

    def fake(geo):
        return {"kaehler": 0.0, "almost_kaehler": 0.0, "nearly_kaehler": 0.0, "quasi_kaehler": 0.0, "semi_kaehler": 0.0, "hermitian": 1.0}

    monkeypatch.setattr(geometry, "class_residuals", fake)
    with pytest.raises(ClassificationInconsistencyError):
        geometry.classify(get_model("flat"), np.zeros((1, 4)), CFG)


def test_class_residuals_keys():
    res = class_residuals(local_geometry(get_model("flat"), np.zeros(4), CFG))
    assert set(res) == {"kaehler", "almost_kaehler", "nearly_kaehler", "quasi_kaehler", "semi_kaehler", "hermitian"}


def test_nabla_J_formula_from_levi_civita():
    chart = get_model("perturbed_push")
    p = random_points(chart, 1, np.random.default_rng(2))[0]
    geo = local_geometry(chart, p, CFG)
    G = christoffel_levi_civita(chart, p, CFG).gamma
    assert np.max(np.abs(nabla_J(chart, p, CFG) - covariant_acs(geo, G))) <= 1e-12


def test_bergman_sectional_curvature_range():
    chart = get_model("bergman")
    rng = np.random.default_rng(30)
    for _ in range(10):
        p = rng.normal(size=4)
        p *= rng.uniform(0.05, 0.7) / np.linalg.norm(p)
        R = riemann_tensor(chart, p, CFG)
        X, Y = rng.normal(size=(2, 4))
        K = sectional_curvature(chart, p, X, Y, CFG, R)
        assert -4 - 1e-5 <= K <= -1 + 1e-5
        J = chart.acs_at(p)
        assert abs(sectional_curvature(chart, p, X, J @ X, CFG, R) + 4) <= 1e-5


def test_flat_riemann_zero():
    assert np.max(np.abs(riemann_tensor(get_model("flat"), np.array([0.1, 0.2, 0.3, 0.4]), CFG))) == 0
