"""Diagnostics: convergence detection, temperature tuning, monotonicity probes, value-gap checks."""

from iesl.analysis.convergence import ConvergenceVerdict, detect_convergence, iterations_to_threshold
from iesl.analysis.hypomono import HypomonotonicityProbe, probe_hypomonotonicity
from iesl.analysis.value_gap import ValueGapReport, verify_value_gap
from iesl.analysis.tuning import Probe, TuneResult, bisect_eps, max_bisection_probes

__all__ = [
    "ConvergenceVerdict",
    "HypomonotonicityProbe",
    "ValueGapReport",
    "Probe",
    "TuneResult",
    "bisect_eps",
    "detect_convergence",
    "iterations_to_threshold",
    "max_bisection_probes",
    "probe_hypomonotonicity",
    "verify_value_gap",
]
