"""Command line: verify, classify, curve and zoo.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
configuration or construction error."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..charts import random_points
from ..differentiation import DifferentiationConfig
from ..errors import PluriharmError
from ..geometry import classify
from ..models import MAP_SPECS, MODEL_SPECS, MapSpec, ModelSpec, build_map, build_model, get_map, get_model
from ..monotonicity import CASE_TAGS, MonotonicityCase, measure_hypotheses, ratio_curve
from ..quadrature import QuadratureRule
from .report import FORMATS, CheckRecord, VerificationReport, emit_report, emit_reports
from .suites import SUITE_IDS, SuiteSpec, default_threads, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def parse_radii(text: str) -> list:
    """``start:stop:count`` (linearly spaced, inclusive) or a comma separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            values = np.linspace(float(start), float(stop), int(count))
        else:
            values = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"radii must be start:stop:count or a comma list, got {text!r}")
    if values.size == 0 or np.any(values <= 0) or np.any(np.diff(values) <= 0):
        raise argparse.ArgumentTypeError("radii must be positive and strictly increasing")
    return [float(v) for v in values]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="root seed for every sampled quantity")
    p.add_argument("--fd-step", type=float, default=1e-5, help="finite-difference step")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default from PLURIHARM_THREADS or 1)")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pluriharm", description="Numerical verification of almost Hermitian pluriharmonic map identities.")
    sub = parser.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", action="append", choices=SUITE_IDS, help="suite id (repeatable; default all)")
    v.add_argument("--config", type=Path, help="SuiteSpec JSON file; command line flags override its fields")
    v.add_argument("--model", action="append", help="restrict to these zoo models (repeatable)")
    v.add_argument("--map", action="append", help="restrict to these zoo maps (repeatable)")
    v.add_argument("--radii", type=parse_radii, help="override monotonicity radii")
    v.add_argument("--tol", type=float, help="override the identity tolerance")
    v.add_argument("--samples", type=float, help="scale factor on every sample count")
    _common(v)

    c = sub.add_parser("classify", help="class flags of a model")
    c.add_argument("--model", help="zoo model name")
    c.add_argument("--model-spec", type=Path, help="ModelSpec JSON file")
    c.add_argument("--points", type=int, default=20, help="sample points")
    c.add_argument("--tol", type=float, default=1e-6)
    _common(c)

    k = sub.add_parser("curve", help="monotonicity ratio curve")
    k.add_argument("--model", help="zoo model name (domain)")
    k.add_argument("--model-spec", type=Path, help="ModelSpec JSON file for the domain")
    k.add_argument("--map", help="zoo map name")
    k.add_argument("--map-spec", type=Path, help="MapSpec JSON file")
    k.add_argument("--case", choices=CASE_TAGS, required=True)
    k.add_argument("--radii", type=parse_radii, required=True)
    k.add_argument("--D", type=float, default=None, help="curvature constant for cases i-iii")
    k.add_argument("--C", type=float, default=0.0, help="|V| constant of the case")
    k.add_argument("--beta", type=float, default=1.0)
    k.add_argument("--a", type=float, default=1.0)
    k.add_argument("--R0", type=float, default=0.0, help="excised radius for annulus cases")
    k.add_argument("--radial-nodes", type=int, default=24)
    k.add_argument("--angle-nodes", type=int, default=16)
    k.add_argument("--tol", type=float, default=1e-6, help="allowed monotonicity violation")
    _common(k)

    z = sub.add_parser("zoo", help="list models and maps")
    z.add_argument("--format", choices=("json", "text"), default="text")
    z.add_argument("--out", type=Path)
    return parser


def _threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def _cfg(args) -> DifferentiationConfig:
    return DifferentiationConfig(step=args.fd_step)


def _write(args, data: bytes):
    if args.out is not None:
        args.out.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load_model(args):
    if args.model_spec is not None:
        out = build_model(ModelSpec.from_json(args.model_spec.read_text()))
        return out[0] if isinstance(out, tuple) else out
    if args.model is None:
        raise UsageError("give --model or --model-spec")
    return get_model(args.model)


def cmd_verify(args) -> int:
    base = json.loads(args.config.read_text()) if args.config else {}
    overrides = {
        "models": args.model,
        "maps": args.map,
        "radii": args.radii,
        "tol": args.tol,
        "samples": args.samples,
        "threads": args.threads,
    }
    base.setdefault("seed", args.seed)
    base.setdefault("fd_step", args.fd_step)
    if args.seed != 0:
        base["seed"] = args.seed
    if args.fd_step != 1e-5:
        base["fd_step"] = args.fd_step
    base.update({k: v for k, v in overrides.items() if v is not None})
    suites = args.suite or ([base["suite_id"]] if "suite_id" in base else list(SUITE_IDS))
    reports = []
    for sid in suites:
        spec = SuiteSpec.from_json(json.dumps({**base, "suite_id": sid}))
        reports.append(run_suite(spec))
    _write(args, emit_reports(reports, args.format, args.timing))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def cmd_classify(args) -> int:
    chart = _load_model(args)
    pts = random_points(chart, args.points, np.random.default_rng(args.seed))
    flags = classify(chart, pts, _cfg(args), args.tol)
    report = VerificationReport(suite_id=f"classify:{chart.name}", environment={"seed": args.seed, "fd_step": args.fd_step, "points": args.points})
    members = [k for k, v in flags.as_dict().items() if v]
    report.findings.append({
        "name": "class flags",
        "summary": (", ".join(members) or "no class") + f" (threshold {args.tol:g}, {len(pts)} points)",
        "flags": flags.as_dict(),
        "residuals": {k: float(v) for k, v in flags.residuals.items()},
    })
    expected = MODEL_SPECS[chart.name].expected_flags if chart.name in MODEL_SPECS else {}
    wrong = [k for k, v in expected.items() if flags.as_dict()[k] != v]
    if expected:
        report.add(CheckRecord("matches the declared class", "is called", float(len(wrong)), 0.0, 0.0, note=", ".join(wrong)))
    _write(args, emit_report(report, args.format, args.timing))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_curve(args) -> int:
    chart = _load_model(args)
    if args.map_spec is not None:
        u = build_map(MapSpec.from_json(args.map_spec.read_text()))
    elif args.map is not None:
        u = get_map(args.map)
    else:
        raise UsageError("give --map or --map-spec")
    if u.domain.name != chart.name:
        raise UsageError(f"map {u.name} has domain {u.domain.name}, not {chart.name}")
    case = MonotonicityCase(args.case, chart.dim_half, D=args.D, C=args.C, beta=args.beta, a=args.a, R0=args.R0)
    rule = QuadratureRule(chart.dim, args.radial_nodes, args.angle_nodes)
    hyp = measure_hypotheses(u, chart, case, args.radii[-1], 100, args.seed, _cfg(args))
    curve = ratio_curve(u, chart, case, args.radii, rule, hyp)
    if args.format == "csv":
        _write(args, curve.to_csv().encode("utf-8"))
    report = VerificationReport(suite_id=f"curve:{u.name}:{args.case}", environment={"seed": args.seed, "fd_step": args.fd_step, **rule.to_dict()})
    report.curves.append({"name": u.name, **curve.to_dict()})
    report.add(CheckRecord("hypotheses certified", "Hermitian pluriharmonic", 0.0 if curve.certified else 1.0, 0.0, 0.0, note=json.dumps(hyp, sort_keys=True)))
    report.add(CheckRecord("ratio non-decreasing", "monotonicity", -curve.monotonicity_violation(), 0.0, args.tol, len(args.radii)))
    if args.format != "csv":
        _write(args, emit_report(report, args.format, args.timing))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_zoo(args) -> int:
    models = {n: {"kind": s.kind, "params": s.params, "expected_flags": s.expected_flags} for n, s in MODEL_SPECS.items()}
    maps = {n: {"domain": s.domain_model, "target": s.target_model, "class": s.holomorphy_class} for n, s in MAP_SPECS.items()}
    if args.format == "json":
        data = json.dumps({"models": models, "maps": maps}, sort_keys=True, indent=2, default=str) + "\n"
    else:
        lines = ["models:"]
        for n, m in models.items():
            flags = ", ".join(k for k, v in m["expected_flags"].items() if v) or "-"
            lines.append(f"  {n:16s} {m['kind']:22s} {flags}")
        lines.append("maps:")
        for n, m in maps.items():
            lines.append(f"  {n:24s} {m['domain']:>16s} -> {m['target']:16s} {m['class']}")
        data = "\n".join(lines) + "\n"
    _write(args, data.encode("utf-8"))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "curve": cmd_curve, "zoo": cmd_zoo}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return COMMANDS[args.verb](args)
    except (PluriharmError, UsageError, OSError, ValueError) as exc:
        print(f"pluriharm {args.verb}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
