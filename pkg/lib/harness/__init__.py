from lib.harness.metrics import (
    classify_trace,
    compute_metrics,
    format_ratios,
    render_ratio_table,
    tally_traces,
)
from lib.harness.replay import ReplayResult, replay_file, replay_trace
from lib.harness.report import emit_report, trace_name
from lib.harness.runner import classify_failure, run_suite, run_trial, scripted_factory
from lib.harness.suite import DEFAULT_SUITE, Suite, load_suite

__all__ = [
    "DEFAULT_SUITE",
    "ReplayResult",
    "Suite",
    "classify_failure",
    "classify_trace",
    "compute_metrics",
    "emit_report",
    "format_ratios",
    "load_suite",
    "render_ratio_table",
    "replay_file",
    "replay_trace",
    "run_suite",
    "run_trial",
    "scripted_factory",
    "tally_traces",
    "trace_name",
]
