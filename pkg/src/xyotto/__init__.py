"""Finite-time two-qubit XY quantum Otto cycle."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analysis import (
    GapNotFound,
    GapReport,
    RegimeMap,
    adiabaticity_curve,
    counter_rotating_condition,
    efficiency_curve,
    find_temperature_gap,
    find_threshold_T1,
    high_efficiency_region,
    sweep_regimes,
)
from .cycle import CycleOutcome, Regime, StrokeEnergetics, classify, run_cycle, stroke_energetics
from .dynamics import FieldSchedule, adiabaticity, integrate_amplitudes, schrodinger_oracle
from .model import ModelParams, g, p_min, quench_adiabaticity, work_function

__all__ = [
    "__version__",
    "BACKEND",
    "ModelParams",
    "FieldSchedule",
    "Regime",
    "StrokeEnergetics",
    "CycleOutcome",
    "RegimeMap",
    "GapReport",
    "GapNotFound",
    "g",
    "work_function",
    "quench_adiabaticity",
    "p_min",
    "adiabaticity",
    "integrate_amplitudes",
    "schrodinger_oracle",
    "stroke_energetics",
    "classify",
    "run_cycle",
    "sweep_regimes",
    "adiabaticity_curve",
    "efficiency_curve",
    "find_threshold_T1",
    "find_temperature_gap",
    "high_efficiency_region",
    "counter_rotating_condition",
]
