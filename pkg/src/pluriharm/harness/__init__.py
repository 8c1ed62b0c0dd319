"""Verification harness: named suites, reports and the command line."""

from .report import CheckRecord, VerificationReport, emit_report, emit_reports, parse_report, parse_reports
from .suites import SUITE_IDS, SuiteSpec, run_suite

__all__ = ["CheckRecord", "VerificationReport", "emit_report", "emit_reports", "parse_report", "parse_reports", "SUITE_IDS", "SuiteSpec", "run_suite"]
