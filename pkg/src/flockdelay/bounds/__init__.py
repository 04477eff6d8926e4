from flockdelay.bounds.checks import ALL_CHECKS, THEORY_CHECKS, CheckResult
from flockdelay.bounds.report import CheckSettings, DiagnosticsReport, FlockingVerdict, build_report, flocking_verdict

__all__ = [
    "ALL_CHECKS",
    "THEORY_CHECKS",
    "CheckResult",
    "CheckSettings",
    "DiagnosticsReport",
    "FlockingVerdict",
    "build_report",
    "flocking_verdict",
]
