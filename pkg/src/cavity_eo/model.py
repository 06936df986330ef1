"""System parameters and unit handling.

All rates are stored as plain floats. Only the detunings relative to the
cavity frequency are kept (qubit-cavity ``delta`` and photon-cavity
``delta_p``); absolute frequencies never enter any formula.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

from .errors import ValidationError


class Units(str, enum.Enum):
    UNITS_OF_G = "units-of-g"
    ANGULAR = "angular-frequency"
    FREQ_OVER_2PI = "frequency-over-2pi"

    @classmethod
    def parse(cls, value: "Units | str") -> "Units":
        if isinstance(value, Units):
            return value
        key = str(value).strip().lower().replace("π", "pi").replace("_", "-")
        aliases = {
            "units-of-g": cls.UNITS_OF_G,
            "g": cls.UNITS_OF_G,
            "angular-frequency": cls.ANGULAR,
            "angular": cls.ANGULAR,
            "frequency-over-2pi": cls.FREQ_OVER_2PI,
            "mhz-over-2pi": cls.FREQ_OVER_2PI,
            "hz-over-2pi": cls.FREQ_OVER_2PI,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError("units", f"unknown unit system {value!r}") from None


_RATES = ("g", "kappa", "gamma", "gamma_p")
_DETUNINGS = ("delta", "delta_p")


@dataclass(frozen=True)
class SystemParams:
    """Qubit-cavity parameters.

    g        coherent qubit-cavity coupling (> 0)
    kappa    cavity decay rate (total over both mirrors)
    gamma    spontaneous emission into non-cavity modes
    gamma_p  pure dephasing rate
    delta    qubit-cavity detuning, omega_q - omega_c
    delta_p  photon-cavity detuning, omega_p - omega_c
    """

    kappa: float
    gamma: float
    gamma_p: float
    delta: float = 0.0
    g: float = 1.0
    delta_p: float = 0.0
    units: Units = Units.UNITS_OF_G

    def __post_init__(self):
        object.__setattr__(self, "units", Units.parse(self.units))
        for name in _RATES + _DETUNINGS:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(name, f"not a number: {value!r}") from None
            if not math.isfinite(value):
                raise ValidationError(name, f"must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in _RATES:
            if getattr(self, name) < 0:
                raise ValidationError(name, f"must be non-negative, got {getattr(self, name)}")
        if self.g <= 0:
            raise ValidationError("g", "coupling must be positive; use the empty-cavity branch for g = 0")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["units"] = self.units.value
        return d

    def scaled(self, factor: float) -> "SystemParams":
        """Multiply every rate and detuning by ``factor``."""
        return self.replace(**{n: getattr(self, n) * factor for n in _RATES + _DETUNINGS})


def normalize(params: SystemParams) -> SystemParams:
    """Rescale so that g = 1, converting ν/2π inputs to angular rates first."""
    p = params
    if p.units is Units.FREQ_OVER_2PI:
        p = p.scaled(2 * math.pi).replace(units=Units.ANGULAR)
    if p.units is Units.UNITS_OF_G and p.g == 1.0:
        return p
    g = p.g
    out = {n: getattr(p, n) / g for n in _RATES + _DETUNINGS}
    out["g"] = 1.0
    return p.replace(units=Units.UNITS_OF_G, **out)


def complex_frequencies(params: SystemParams) -> tuple[complex, complex, complex]:
    """Return (omega_q, omega_c, xi), complex and measured from omega_c.

    omega_c = -i kappa/2, omega_q = delta - i(gamma/2 + gamma_p) and
    xi = (kappa + gamma)/2 + gamma_p + i delta.
    """
    p = params
    wq = complex(p.delta, -(p.gamma / 2 + p.gamma_p))
    wc = complex(0.0, -p.kappa / 2)
    xi = complex((p.kappa + p.gamma) / 2 + p.gamma_p, p.delta)
    return wq, wc, xi
