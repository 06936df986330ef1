"""Long-pulse (continuous-wave) transmission and entanglement figures of merit.

A monochromatic probe at the cavity frequency drives the qubit-cavity system.
The transmitted light splits into an elastic part with amplitude ``t_e`` and
an inelastic part with flux ``|t_i|^2`` that has left an excitation in the
dephasing bath. Only these two numbers feed the fidelity and click
probability of the heralded entanglement operation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ConsistencyError, DegenerateResponseError, PreconditionError
from .model import SystemParams, complex_frequencies

NEG_CLAMP = 1e-12
NO_CLICK = 1e-14
DEGENERATE_DENOM = 1e-14


class Regime(str, enum.Enum):
    LONG_PULSE = "long-pulse"
    FINITE_PULSE = "finite-pulse"


class QubitState(str, enum.Enum):
    ZERO = "zero"
    ONE = "one"


class Undefined(enum.Enum):
    """Fidelity of a protocol run whose click probability is zero."""

    FIDELITY = "undefined"

    def __repr__(self):
        return "UNDEFINED"


UNDEFINED = Undefined.FIDELITY


@dataclass(frozen=True)
class TransmissionResult:
    t_e: complex
    t_i_sq: float
    regime: Regime = Regime.LONG_PULSE

    @property
    def t_i(self) -> float:
        """Inelastic amplitude with its (unobservable) phase fixed to zero."""
        return self.t_i_sq ** 0.5


@dataclass(frozen=True)
class EoFigures:
    fidelity: float | Undefined
    probability: float

    @property
    def defined(self) -> bool:
        return self.fidelity is not UNDEFINED

    def fidelity_or(self, default: float) -> float:
        return default if self.fidelity is UNDEFINED else self.fidelity

    def as_dict(self) -> dict:
        f = self.fidelity.value if self.fidelity is UNDEFINED else self.fidelity
        return {"fidelity": f, "probability": self.probability}


def steady_state_variables(params: SystemParams) -> tuple[complex, complex, float]:
    """Dimensionless cavity amplitude, qubit coherence and cavity photon flux.

    Returns ``(x_c, x_sigma, x_cdagc)`` for the qubit in state |1>. ``x_c`` is
    the elastic transmission amplitude and ``x_cdagc`` the total transmitted
    flux, both normalised to the input.
    """
    p = params
    g, k, ga = p.g, p.kappa, p.gamma
    _, _, xi = complex_frequencies(p)
    a = complex(ga / 2 + p.gamma_p, p.delta)
    den = k * a + 2 * g * g
    x_c = k * a / den
    x_s = k * g / den

    if xi == 0:
        raise DegenerateResponseError("qubit coherence has no damping and no detuning")
    inv_xi = (1 / xi).real
    flux_den = k * ga + 2 * g * g * (k + ga) * inv_xi
    if abs(flux_den) < DEGENERATE_DENOM * g * g:
        raise DegenerateResponseError(
            "photon-number response is 0/0 (kappa = gamma = 0); "
            "evaluate the empty-cavity branch (qubit state zero) instead"
        )
    flux_num = (ga + 2 * g * g * inv_xi) * x_c.real - g * ga * (x_s / xi).real
    x_cdagc = k * flux_num / flux_den
    return x_c, x_s, x_cdagc


def transmission(params: SystemParams, qubit_state: QubitState | str = QubitState.ONE) -> TransmissionResult:
    """Elastic amplitude and inelastic flux through the cavity.

    The optically inactive state |0> sees an empty cavity, which transmits
    a resonant photon perfectly; that branch is returned exactly.
    """
    if QubitState(qubit_state) is QubitState.ZERO:
        return TransmissionResult(1.0 + 0j, 0.0)
    x_c, _, x_cdagc = steady_state_variables(params)
    difference = x_cdagc - abs(x_c) ** 2
    if difference < -NEG_CLAMP:
        raise ConsistencyError(f"inelastic flux {difference:.3e} is negative beyond rounding")
    t_i_sq = min(inelastic_flux(params), 1.0)
    if abs(t_i_sq - difference) > 1e-9:
        raise ConsistencyError(
            f"inelastic flux {t_i_sq:.6e} disagrees with total minus elastic {difference:.6e}"
        )
    return TransmissionResult(complex(x_c), t_i_sq)


def inelastic_flux(params: SystemParams) -> float:
    """|t_i|^2 as a product of non-negative factors.

    Equal to x_cdagc - |x_c|^2, but free of the cancellation between two
    numbers close to one. With a = gamma/2 + gamma_p + i delta, b = kappa/2
    and rho = Re 1/(a + b), the dephasing-driven fraction of the transmitted
    light is

        kappa^2 gamma_p g^4 rho / (2 |ab + g^2|^2 (gamma (b + g^2 rho) + kappa g^2 rho)).
    """
    p = params
    if p.gamma_p == 0 or p.kappa == 0:
        return 0.0
    g2 = p.g * p.g
    a = complex(p.gamma / 2 + p.gamma_p, p.delta)
    b = p.kappa / 2
    rho = (1 / (a + b)).real
    loss = p.gamma * (b + g2 * rho) + p.kappa * g2 * rho
    return p.kappa ** 2 * p.gamma_p * g2 * g2 * rho / (2 * abs(a * b + g2) ** 2 * loss)


def figures_from_norms(elastic: float, inelastic: float) -> EoFigures:
    """Fidelity and click probability from the elastic-difference and
    inelastic norms (|1 - t_e|^2 and |t_i|^2 in the long-pulse limit)."""
    prob = elastic / 8 + inelastic / 4
    if elastic < NO_CLICK and inelastic < NO_CLICK:
        return EoFigures(UNDEFINED, 0.0)
    fid = (elastic + inelastic / 2) / (elastic + 2 * inelastic)
    return EoFigures(min(max(fid, 0.0), 1.0), min(max(prob, 0.0), 1.0))


def eo_figures(t: TransmissionResult) -> EoFigures:
    return figures_from_norms(abs(1 - t.t_e) ** 2, t.t_i_sq)


def evaluate(params: SystemParams) -> tuple[TransmissionResult, EoFigures]:
    t = transmission(params, QubitState.ONE)
    return t, eo_figures(t)


def blocking_transmission_probability(params: SystemParams) -> float:
    """Total transmission kappa*gamma_p / (kappa*gamma_p + 2 g^2) at zero
    detuning and zero spontaneous emission."""
    p = params
    if p.delta != 0 or p.gamma != 0:
        raise PreconditionError("blocking transmission needs delta = 0 and gamma = 0")
    return p.kappa * p.gamma_p / (p.kappa * p.gamma_p + 2 * p.g ** 2)


def dispersive_phase(params: SystemParams) -> float:
    """Dispersive phase g^2 / (delta * kappa). Diagnostic only."""
    p = params
    if p.delta == 0 or p.kappa == 0:
        raise PreconditionError("dispersive phase needs delta != 0 and kappa > 0")
    return p.g ** 2 / (p.delta * p.kappa)
