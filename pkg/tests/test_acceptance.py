"""Acceptance criteria at full size.

Each test runs the suites behind one criterion with default settings, prints a
single PASS/FAIL line (visible in the captured test log) and asserts it."""

import time

import numpy as np
import pytest

from pluriharm.harness import SUITE_IDS, SuiteSpec, emit_report, run_suite

_CACHE = {}


def suite(suite_id):
    """Full-size report of ``suite_id`` and its wall time, computed once per session."""
    if suite_id not in _CACHE:
        start = time.perf_counter()
        report = run_suite(SuiteSpec(suite_id, threads=1))
        _CACHE[suite_id] = (report, time.perf_counter() - start)
    return _CACHE[suite_id]


def judge(capsys, number, title, checks, seconds, budget, extra=""):
    failed = [c for c in checks if not c.passed]
    worst = max((c.max_residual / c.tolerance if c.tolerance > 0 else (0.0 if c.passed else np.inf)) for c in checks) if checks else 0.0
    ok = bool(checks) and not failed and seconds < budget
    detail = f"{len(checks)} checks, worst residual/tolerance {worst:.3g}, {seconds:.1f} s (budget {budget:g} s)"
    if failed:
        detail += "; failing: " + "; ".join(f"{c.name} ({c.max_residual:.3g} > {c.tolerance:.1g})" for c in failed[:3])
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}{extra}")
    assert checks, "no checks were produced"
    assert not failed, [c.name for c in failed]
    assert seconds < budget


def checks_of(*suite_ids, select=None):
    checks, seconds = [], 0.0
    for sid in suite_ids:
        report, wall = suite(sid)
        checks += [c for c in report.checks if select is None or select(c.name)]
        seconds += wall
    return checks, seconds


def test_criterion_01_connection_axioms(capsys):
    checks, t = checks_of("connection_axioms")
    judge(capsys, 1, "second canonical connection axioms on every zoo chart", checks, t, 10)


def test_criterion_02_nijenhuis_identity(capsys):
    checks, t = checks_of("lemma32")
    judge(capsys, 2, "Nijenhuis identity over random samples", checks, t, 10)


def test_criterion_03_holomorphic_maps_pluriharmonic(capsys):
    checks, t = checks_of("theorem31")
    assert any(c.name.startswith("shear_perturbed") and "Nijenhuis" in c.name for c in checks)
    judge(capsys, 3, "holomorphic zoo maps are Hermitian pluriharmonic", checks, t, 30)


def test_criterion_04_levi_civita_equivalence_and_tension(capsys):
    checks, t = checks_of("prop41", "prop42")
    judge(capsys, 4, "Levi-Civita equivalence and tension shift into Kaehler targets", checks, t, 60)


def test_criterion_05_divergence_identity(capsys):
    checks, t = checks_of("lemma25_divergence")
    judge(capsys, 5, "stress-energy divergence identity over 500 triples", checks, t, 60)


def test_criterion_06_sigma_codifferential_and_closedness(capsys):
    checks, t = checks_of("lemma44_46")
    judge(capsys, 6, "delta sigma = sigma(V) and d sigma identity on anti-holomorphic maps", checks, t, 30)


def test_criterion_07_eigenvalue_lower_bound(capsys):
    checks, t = checks_of("lemma47_bound")
    assert any(c.samples >= 1000 for c in checks if "no violation" in c.name)
    judge(capsys, 7, "stress pairing lower bound (m - 1 pairs, J-adapted H)", checks, t, 5)


def test_criterion_08_hessian_comparison(capsys):
    checks, t = checks_of("lemma45_comparison")
    margins = [c for c in checks if "comparison margin" in c.name]
    assert len(margins) == 5 and all(c.samples >= 20 for c in margins)
    judge(capsys, 8, "Hessian comparison margins and Riccati consistency", checks, t, 10)


def test_criterion_09_flat_monotonicity(capsys):
    checks, t = checks_of("thm410_412_monotonicity", select=lambda n: n.startswith("flat conjugation"))
    judge(capsys, 9, "flat case i ratio equals pi^2 r^2", checks, t, 60)


def test_criterion_10_hyperbolic_monotonicity(capsys):
    checks, t = checks_of("thm410_412_monotonicity", select=lambda n: n.startswith("hyperbolic conjugation"))
    assert any(c.samples == 20 and "non-decreasing" in c.name for c in checks)
    judge(capsys, 10, "hyperbolic case iv ratio non-decreasing with differential inequality", checks, t, 300)


def test_criterion_11_annulus(capsys):
    checks, t = checks_of("thm413_annulus")
    judge(capsys, 11, "annulus variant with R0 = 0.1 consistent with the full-ball curve", checks, t, 300)


def test_criterion_12_growth_diagnostics(capsys):
    checks, t = checks_of("sec5_growth")
    judge(capsys, 12, "growth diagnostics for holomorphic and conjugation maps", checks, t, 60)


@pytest.mark.xfail(
    strict=True,
    reason="the stated closed form 2(1-m)phi'/phi^4 is the norm of V only up to a factor phi^2; "
    "the measured |V| matches 2(1-m)phi'/phi^2 instead (see the companion test below)",
)
def test_criterion_13_conformal_torsion_vector_stated_form(capsys):
    checks, t = checks_of("classification_zoo", select=lambda n: n == "conformal: |V| matches 2(1-m) phi'/phi^4")
    judge(capsys, 13, "conformal |V| against the stated closed form", checks, t, 10,
          extra=" (known discrepancy: the stated form omits a factor phi^2)")


def test_criterion_13_companion_conformal_torsion_vector(capsys):
    checks, t = checks_of("classification_zoo", select=lambda n: n.startswith("conformal: ") and "phi^4" not in n)
    assert len(checks) >= 3
    judge(capsys, 13, "(companion) conformal V field, |V| = 2(1-m)phi'/phi^2 <= C", checks, t, 10)


def test_zoo_classification_other_checks(capsys):
    checks, t = checks_of("classification_zoo", select=lambda n: "|V| matches" not in n)
    judge(capsys, 13, "(companion) zoo classification and map classes", checks, t, 10)


def test_criterion_14_determinism(capsys):
    start = time.perf_counter()
    checks = []
    from pluriharm.harness import CheckRecord

    for sid in SUITE_IDS:
        spec = SuiteSpec(sid, seed=42, samples=0.2, threads=1)
        first, second = emit_report(run_suite(spec)), emit_report(run_suite(spec))
        checks.append(CheckRecord(f"{sid}: rerun byte-identical", "determinism", 0.0 if first == second else 1.0, 0.0, 0.0))
    for sid in ("lemma25_divergence", "lemma47_bound"):
        spec = SuiteSpec(sid, seed=7, threads=1)
        same = emit_report(run_suite(spec)) == emit_report(run_suite(spec))
        checks.append(CheckRecord(f"{sid}: full-size rerun byte-identical", "determinism", 0.0 if same else 1.0, 0.0, 0.0))
    judge(capsys, 14, "reruns with identical spec and seed are byte-identical", checks, time.perf_counter() - start, 600)
