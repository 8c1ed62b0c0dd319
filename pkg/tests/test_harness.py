import json
import sys
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluriharm.errors import ConfigError
from pluriharm.harness import (
    SUITE_IDS,
    CheckRecord,
    SuiteSpec,
    VerificationReport,
    emit_report,
    emit_reports,
    parse_report,
    parse_reports,
    run_suite,
)
from pluriharm.harness.cli import EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_OK, main, parse_radii
from pluriharm.harness.suites import SUITE_CRITERIA, THREADS_ENV, default_threads
from pluriharm.monotonicity import CURVE_COLUMNS

SPEC_OPERATIONS = {
    "differentiation": ["partial_derivative", "second_partial"],
    "quadrature": ["ball_quadrature"],
    "geometry": ["christoffel_levi_civita", "nabla_J", "nijenhuis", "second_canonical", "codifferential_J_and_V",
                 "fundamental_form_and_domega", "classify"],
    "maps": ["differential", "sigma_split", "energy_densities", "hessian_levi_civita", "hessian_second_canonical",
             "pluriharmonic_defect", "theorem_A_identity_residual", "alpha_tensor", "prop41_equivalence_residual",
             "tension_fields"],
    "stress_energy": ["stress_tensor", "form_derivatives", "lemma_d_residual", "lemma_c_residual", "stress_lower_bound"],
    "radial": ["hess_r", "comparison_check", "eigen_pair_sum"],
    "monotonicity": ["weighted_partial_energy", "ratio_curve", "differential_inequality_check", "growth_diagnostic"],
    "models": ["build_model", "build_map"],
    "harness/suites": ["run_suite"],
    "harness/report": ["emit_report"],
}

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
records = st.builds(
    CheckRecord,
    name=st.text(max_size=20),
    anchor=st.text(max_size=20),
    max_residual=st.one_of(finite, st.just(float("inf"))),
    mean_residual=finite,
    tolerance=finite,
    samples=st.integers(0, 10_000),
    note=st.text(max_size=20),
)
reports = st.builds(
    VerificationReport,
    suite_id=st.sampled_from(SUITE_IDS),
    checks=st.lists(records, max_size=5),
    environment=st.dictionaries(st.text(max_size=8), st.one_of(st.integers(), finite, st.text(max_size=8)), max_size=4),
    findings=st.lists(st.fixed_dictionaries({"name": st.text(max_size=8), "summary": st.text(max_size=20)}), max_size=3),
)


@given(reports)
def test_report_json_round_trip(report):
    back = parse_report(emit_report(report, "json"))
    assert back.to_dict() == report.to_dict()
    assert json.loads(emit_report(report, "json"))["schema"] == "pluriharm.report/1"


@given(st.lists(reports, min_size=2, max_size=3))
def test_report_set_round_trip(items):
    back = parse_reports(emit_reports(items, "json"))
    assert [r.to_dict() for r in back] == [r.to_dict() for r in items]


def test_pass_is_residual_within_tolerance():
    assert CheckRecord("a", "x", 1e-7, 0, 1e-6).passed
    assert not CheckRecord("a", "x", 2e-6, 0, 1e-6).passed
    assert not CheckRecord("a", "x", float("nan"), 0, 1e-6).passed
    report = VerificationReport("lemma32", [CheckRecord("a", "x", 0, 0, 1), CheckRecord("b", "x", 2, 0, 1)])
    assert not report.passed


def test_empty_report_emits_valid_documents():
    empty = VerificationReport("lemma32")
    doc = json.loads(emit_report(empty, "json"))
    assert doc["checks"] == [] and doc["curves"] == [] and doc["passed"] is True
    assert emit_report(empty, "csv").decode().strip() == "check,max_residual,mean_residual,tolerance,passed"
    assert emit_report(empty, "text").decode().startswith("suite lemma32: PASS")


def test_curve_csv_header():
    report = VerificationReport("thm410_412_monotonicity", curves=[{"name": "c", "rows": [dict.fromkeys(CURVE_COLUMNS, 1.0)]}])
    lines = emit_report(report, "csv").decode().splitlines()
    assert lines[0] == "curve,r,weighted_integral,normalizer,ratio,boundary_integral,margin"
    assert len(lines) == 2


def test_timing_only_on_request():
    r = VerificationReport("lemma32", wall_time=1.5)
    assert "wall_time" not in json.loads(emit_report(r, "json"))
    assert json.loads(emit_report(r, "json", include_timing=True))["wall_time"] == 1.5
    with pytest.raises(ValueError):
        emit_report(r, "yaml")
    with pytest.raises(ValueError):
        parse_report('{"schema": "other"}')


def test_suite_spec_json_round_trip_and_validation():
    spec = SuiteSpec("lemma47_bound", models=["flat"], radii=[0.5, 1.0], seed=2**63, samples=0.5, tol=1e-7, threads=2)
    assert SuiteSpec.from_json(spec.to_json()) == spec
    for bad in ({"suite_id": "nope"}, {"suite_id": "lemma32", "seed": -1}, {"suite_id": "lemma32", "threads": 0},
                {"suite_id": "lemma32", "samples": 0}):
        with pytest.raises(ConfigError):
            SuiteSpec(**bad)
    with pytest.raises(ConfigError):
        SuiteSpec.from_json('{"suite_id": "lemma32", "colour": 1}')
    with pytest.raises(ConfigError):
        SuiteSpec.from_json('{"schema": "x", "suite_id": "lemma32"}')


def test_every_suite_maps_to_a_criterion():
    assert set(SUITE_CRITERIA) == set(SUITE_IDS)
    assert all(SUITE_CRITERIA[s] for s in SUITE_IDS)
    assert set().union(*SUITE_CRITERIA.values()) >= set(range(1, 14))


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3 and SuiteSpec("lemma32").threads == 3
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        default_threads()


def test_suite_run_is_byte_identical():
    spec = SuiteSpec("lemma25_divergence", seed=42, samples=0.2, threads=1)
    first, second = emit_report(run_suite(spec)), emit_report(run_suite(spec))
    assert first == second
    assert json.loads(first)["environment"]["seed"] == 42


def test_thread_count_does_not_change_results():
    one = run_suite(SuiteSpec("lemma25_divergence", seed=42, samples=0.2, threads=1))
    two = run_suite(SuiteSpec("lemma25_divergence", seed=42, samples=0.2, threads=2))
    assert [c.name for c in one.checks] == [c.name for c in two.checks]
    for a, b in zip(one.checks, two.checks):
        assert abs(a.max_residual - b.max_residual) <= 1e-12
        assert abs(a.mean_residual - b.mean_residual) <= 1e-12


def test_suite_errors_carry_context():
    with pytest.raises(ConfigError, match="suite connection_axioms"):
        run_suite(SuiteSpec("connection_axioms", models=["no_such_model"]))


def test_suite_failing_check_does_not_abort():
    report = run_suite(SuiteSpec("classification_zoo", samples=0.2))
    names = [c.name for c in report.checks]
    failing = [c for c in report.checks if not c.passed]
    assert failing and failing[0].name != names[-1]


def test_parse_radii():
    assert parse_radii("1:2:3") == [1.0, 1.5, 2.0]
    assert parse_radii("0.5,1,2") == [0.5, 1.0, 2.0]
    for bad in ("2,1", "0:1:3", "a:b:c", ""):
        with pytest.raises(Exception):
            parse_radii(bad)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["zoo"]) == EXIT_OK
    assert "conj_flat" in capsys.readouterr().out
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "lemma32", "--samples", "0.1", "--format", "json", "--out", str(out)]) == EXIT_OK
    assert parse_report(out.read_bytes()).passed
    assert main(["verify", "--suite", "lemma45_comparison", "--suite", "lemma47_bound", "--samples", "0.1",
                 "--format", "json", "--out", str(out)]) == EXIT_OK
    assert [r.suite_id for r in parse_reports(out.read_bytes())] == ["lemma45_comparison", "lemma47_bound"]
    assert main(["classify", "--model", "hopf", "--points", "4", "--format", "json", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["findings"][0]["flags"]["hermitian"] is True
    assert main(["curve", "--model", "flat", "--map", "conj_flat", "--case", "i", "--radii", "0.5,1",
                 "--format", "csv", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CURVE_COLUMNS)
    assert main(["verify", "--suite", "classification_zoo", "--samples", "0.1", "--out", str(out)]) == EXIT_CHECK_FAILED
    assert main(["curve", "--model", "bergman", "--map", "conj_flat", "--case", "iv", "--radii", "0.5,1"]) == EXIT_CONFIG_ERROR
    assert main(["verify", "--suite", "lemma32", "--model", "nope"]) == EXIT_CONFIG_ERROR
    assert main(["classify", "--model-spec", str(tmp_path / "missing.json")]) == EXIT_CONFIG_ERROR
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "unknown"])


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "suite.json"
    cfg.write_text(SuiteSpec("lemma47_bound", samples=0.1, seed=5).to_json())
    out = tmp_path / "r.json"
    assert main(["verify", "--config", str(cfg), "--format", "json", "--out", str(out)]) == EXIT_OK
    report = parse_report(out.read_bytes())
    assert report.suite_id == "lemma47_bound" and report.environment["seed"] == 5


@pytest.mark.slow
def test_suites_exercise_every_operation():
    called = set()

    def profiler(frame, event, arg):
        if event == "call":
            called.add((frame.f_code.co_filename.replace("\\", "/"), frame.f_code.co_name))

    reports = []
    sys.setprofile(profiler)
    threading.setprofile(profiler)
    try:
        for sid in SUITE_IDS:
            reports.append(run_suite(SuiteSpec(sid, samples=0.05, radial_count=8, angle_count=8, threads=1)))
        for r in reports:
            emit_report(r, "json")
    finally:
        sys.setprofile(None)
        threading.setprofile(None)
    missing = [
        f"{module}.{name}"
        for module, names in SPEC_OPERATIONS.items()
        for name in names
        if not any(f.endswith(f"pluriharm/{module}.py") and n == name for f, n in called)
    ]
    assert not missing, missing
