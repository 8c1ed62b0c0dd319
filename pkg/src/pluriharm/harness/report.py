"""Verification reports and their JSON, CSV and text renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..monotonicity import CURVE_COLUMNS

REPORT_SCHEMA = "pluriharm.report/1"
REPORT_SET_SCHEMA = "pluriharm.reports/1"
FORMATS = ("json", "csv", "text")


@dataclass
class CheckRecord:
    """One verified statement; ``passed`` is exactly ``max_residual <= tolerance``."""

    name: str
    anchor: str
    max_residual: float
    mean_residual: float
    tolerance: float
    samples: int = 1
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        d = {k: v for k, v in d.items() if k != "passed"}
        return cls(**d)


def check_from_residuals(name: str, anchor: str, residuals, tolerance: float, note: str = "") -> CheckRecord:
    vals = [float(r) for r in residuals]
    if not vals:
        return CheckRecord(name, anchor, 0.0, 0.0, tolerance, 0, note or "no samples")
    worst = max(vals) if all(math.isfinite(v) for v in vals) else math.inf
    return CheckRecord(name, anchor, worst, sum(vals) / len(vals), tolerance, len(vals), note)


@dataclass
class VerificationReport:
    suite_id: str
    checks: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    curves: list = field(default_factory=list)  # list of {"name", "case", "rows", ...}
    findings: list = field(default_factory=list)  # informational results, never pass/fail
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.checks.append(record)
        return record

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema": REPORT_SCHEMA,
            "suite_id": self.suite_id,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "environment": self.environment,
            "curves": self.curves,
            "findings": self.findings,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(
            suite_id=d["suite_id"],
            checks=[CheckRecord.from_dict(c) for c in d.get("checks", [])],
            environment=d.get("environment", {}),
            curves=d.get("curves", []),
            findings=d.get("findings", []),
            wall_time=d.get("wall_time"),
        )


NONFINITE_TAG = "$float"


def _json_safe(obj):
    """Standard JSON has no inf/nan, so they are written as {"$float": "inf"} and friends."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return {NONFINITE_TAG: repr(obj)}
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _json_restore(obj):
    if isinstance(obj, dict) and set(obj) == {NONFINITE_TAG}:
        return float(obj[NONFINITE_TAG])
    if isinstance(obj, dict):
        return {k: _json_restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_restore(v) for v in obj]
    return obj


def parse_report(data) -> VerificationReport:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    return VerificationReport.from_dict(_json_restore(json.loads(text)))


def _emit_json(report: VerificationReport, include_timing: bool) -> str:
    return json.dumps(_json_safe(report.to_dict(include_timing)), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit_csv(report: VerificationReport) -> str:
    """Curve rows (one block per curve, keyed by curve name); checks if there are no curves."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.curves:
        w.writerow(("curve",) + CURVE_COLUMNS)
        for curve in report.curves:
            for row in curve["rows"]:
                w.writerow([curve["name"]] + [repr(float(row[c])) for c in CURVE_COLUMNS])
    else:
        w.writerow(("check", "max_residual", "mean_residual", "tolerance", "passed"))
        for c in report.checks:
            w.writerow([c.name, repr(c.max_residual), repr(c.mean_residual), repr(c.tolerance), c.passed])
    return buf.getvalue()


def _emit_text(report: VerificationReport, include_timing: bool) -> str:
    lines = [f"suite {report.suite_id}: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks)"]
    for c in report.checks:
        flag = "ok  " if c.passed else "FAIL"
        lines.append(f"  [{flag}] {c.name}: max {c.max_residual:.3e} <= {c.tolerance:.1e} over {c.samples} ({c.anchor})")
        if c.note:
            lines.append(f"         {c.note}")
    for f in report.findings:
        lines.append(f"  [info] {f.get('name', 'finding')}: {f.get('summary', '')}")
    env = ", ".join(f"{k}={v}" for k, v in sorted(report.environment.items()) if not isinstance(v, (dict, list)))
    if env:
        lines.append(f"  environment: {env}")
    if include_timing and report.wall_time is not None:
        lines.append(f"  wall time: {report.wall_time:.2f} s")
    return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, format: str = "json", include_timing: bool = False) -> bytes:
    """Serialise ``report``.  Timing is excluded by default so reruns are byte-identical."""
    if format == "json":
        return _emit_json(report, include_timing).encode("utf-8")
    if format == "csv":
        return _emit_csv(report).encode("utf-8")
    if format == "text":
        return _emit_text(report, include_timing).encode("utf-8")
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def emit_reports(reports, format: str = "json", include_timing: bool = False) -> bytes:
    """Serialise several reports: one JSON document, or concatenated CSV / text sections."""
    reports = list(reports)
    if len(reports) == 1:
        return emit_report(reports[0], format, include_timing)
    if format == "json":
        doc = {"schema": REPORT_SET_SCHEMA, "passed": all(r.passed for r in reports),
               "reports": [r.to_dict(include_timing) for r in reports]}
        return (json.dumps(_json_safe(doc), sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")
    if format in ("csv", "text"):
        parts = []
        for r in reports:
            body = emit_report(r, format, include_timing).decode("utf-8")
            parts.append(f"# suite {r.suite_id}\n{body}" if format == "csv" else body)
        return "".join(parts).encode("utf-8")
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def parse_reports(data) -> list:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    doc = _json_restore(json.loads(text))
    if doc.get("schema") == REPORT_SET_SCHEMA:
        return [VerificationReport.from_dict(d) for d in doc["reports"]]
    return [VerificationReport.from_dict(doc)]
