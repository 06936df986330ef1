"""Heralded entanglement of dephasing matter qubits through a cavity-QED
Mach-Zehnder interferometer: transmission, fidelity, success probability."""

__version__ = "0.1.0"

from .model import SystemParams, Units, complex_frequencies, normalize
from .response import (
    UNDEFINED,
    EoFigures,
    QubitState,
    TransmissionResult,
    eo_figures,
    evaluate,
    steady_state_variables,
    transmission,
)
from .pulsed import finite_pulse_figures

__all__ = [
    "SystemParams",
    "Units",
    "normalize",
    "complex_frequencies",
    "UNDEFINED",
    "EoFigures",
    "QubitState",
    "TransmissionResult",
    "eo_figures",
    "evaluate",
    "steady_state_variables",
    "transmission",
    "finite_pulse_figures",
]
