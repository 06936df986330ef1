"""Exception hierarchy shared by all modules.

Every exception carries an ``exit_code`` so the command-line layer can map
failures onto its fixed exit-code contract without string matching.
"""

from __future__ import annotations


class CavityEOError(Exception):
    """Base class for all package errors."""

    exit_code = 3

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class ValidationError(CavityEOError, ValueError):
    """Invalid parameter value. ``field`` names the offending parameter."""

    exit_code = 2

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["field"] = self.field
        return d


class PreconditionError(CavityEOError, ValueError):
    """An operation was called outside its domain of validity."""


class DegenerateResponseError(CavityEOError):
    """Steady-state photon-number response has a vanishing denominator."""


class DegeneratePolesError(CavityEOError):
    """Two poles coincide; residue sums are not defined."""


class NonIntegrableError(CavityEOError):
    """A response function does not decay, so its norm diverges."""


class DivergentSeriesError(CavityEOError):
    """The geometric series over environmental excitations does not converge."""


class ConsistencyError(CavityEOError):
    """An analytically non-negative quantity came out significantly negative."""


class StiffnessError(CavityEOError):
    """Adaptive step size collapsed below machine resolution."""


class QuadratureError(CavityEOError):
    """Quadrature could not meet the requested tolerance."""


class BracketError(CavityEOError):
    """Root search found no sign change. ``samples`` holds the scan."""

    def __init__(self, message: str, samples: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.samples = samples or []

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["samples"] = [list(s) for s in self.samples]
        return d


class InfeasibleError(CavityEOError):
    """No parameter value satisfies the constraint."""

    def __init__(self, message: str, max_probability: float | None = None):
        super().__init__(message)
        self.max_probability = max_probability

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["max_probability"] = self.max_probability
        return d


class UndefinedFidelityError(CavityEOError):
    """Click probability is zero, so the post-selected state does not exist."""
