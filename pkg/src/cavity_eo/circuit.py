"""Two-qubit Mach-Zehnder protocol.

The photon enters the left input of the first beam splitter, visits both
cavities in superposition, recombines on the second beam splitter, and a
click at the left output heralds the two qubits. States are tracked as a
sparse map from basis labels to amplitudes; light reflected or scattered
out of the interferometer is dropped, so the norm deficit is the loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PreconditionError, UndefinedFidelityError
from .response import EoFigures, TransmissionResult, figures_from_norms

PAIRS = ("00", "01", "10", "11")
PATHS = ("L", "R")
ENVS = ("none", "eL", "eR")

SQ2 = math.sqrt(2)
PHI_T = np.array([0, 1, -1, 0]) / SQ2
PHI_1 = np.array([0, 1, 1, 0]) / SQ2
PHI_E1 = np.array([0, 1, 0, 1]) / SQ2  # |01> + |11>, right-arm error branch
PHI_E2 = np.array([0, 0, 1, 1]) / SQ2  # |10> + |11>, left-arm error branch

Label = tuple  # (path, pair, env)


@dataclass
class ProtocolState:
    amplitudes: dict

    def norm(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def amplitude(self, path: str, pair: str, env: str = "none") -> complex:
        return self.amplitudes.get((path, pair, env), 0j)

    def port_vector(self, path: str, env: str = "none") -> np.ndarray:
        """Two-qubit amplitudes (basis 00, 01, 10, 11) on one output path."""
        return np.array([self.amplitude(path, p, env) for p in PAIRS])


def _add(out: dict, key, value: complex):
    if value != 0:
        out[key] = out.get(key, 0j) + value


def beam_splitter(state: ProtocolState) -> ProtocolState:
    """a_L -> (a_R + i a_L)/sqrt2 and a_R -> (a_L + i a_R)/sqrt2."""
    out: dict = {}
    for (path, pair, env), amp in state.amplitudes.items():
        other = "R" if path == "L" else "L"
        _add(out, (other, pair, env), amp / SQ2)
        _add(out, (path, pair, env), 1j * amp / SQ2)
    return ProtocolState(out)


def cavities(state: ProtocolState, t_e: complex, t_i: complex) -> ProtocolState:
    """Each arm's cavity acts on its own qubit (left arm on the first digit)."""
    out: dict = {}
    for (path, pair, env), amp in state.amplitudes.items():
        qubit = pair[0] if path == "L" else pair[1]
        if qubit == "0":
            _add(out, (path, pair, env), amp)
            continue
        _add(out, (path, pair, env), t_e * amp)
        if env == "none":
            _add(out, (path, pair, "e" + path), t_i * amp)
    return ProtocolState(out)


def initial_state() -> ProtocolState:
    return ProtocolState({("L", p, "none"): 0.5 + 0j for p in PAIRS})


def run_interferometer(t: TransmissionResult, t_i_phase: float = 0.0) -> ProtocolState:
    """Full post-interferometer state for cavity maps (t_e, |t_i|^2).

    ``t_i_phase`` exists only to check that the phase of the inelastic
    amplitude is unobservable.
    """
    t_i = math.sqrt(max(t.t_i_sq, 0.0)) * complex(math.cos(t_i_phase), math.sin(t_i_phase))
    s = beam_splitter(initial_state())
    s = cavities(s, t.t_e, t_i)
    return beam_splitter(s)


def click_probability(state: ProtocolState) -> float:
    return sum(abs(a) ** 2 for (path, _, _), a in state.amplitudes.items() if path == "L")


def reduced_density_matrix(state: ProtocolState) -> np.ndarray:
    """Heralded two-qubit state: trace out path and bath, keep the left port."""
    p = click_probability(state)
    if p < 1e-14:
        raise UndefinedFidelityError("click probability is zero; no heralded state")
    rho = np.zeros((4, 4), dtype=complex)
    for env in ENVS:
        v = state.port_vector("L", env)
        rho += np.outer(v, v.conj())
    return rho / p


def fidelity(rho: np.ndarray, target: np.ndarray = PHI_T) -> float:
    return float(np.real(target.conj() @ rho @ target))


def protocol_figures(t: TransmissionResult) -> EoFigures:
    """Fidelity and click probability from explicit state bookkeeping."""
    state = run_interferometer(t)
    p = click_probability(state)
    try:
        rho = reduced_density_matrix(state)
    except UndefinedFidelityError:
        return figures_from_norms(0.0, 0.0)
    return EoFigures(min(max(fidelity(rho), 0.0), 1.0), p)


# -- repeat-until-success sampling ------------------------------------------

CHUNK = 1 << 16


@dataclass(frozen=True)
class AttemptStats:
    mean_attempts: float
    var_attempts: float
    empirical_fidelity: float
    n_trials: int
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def sample_eo_runs(figures: EoFigures, n_trials: int, seed: int) -> AttemptStats:
    """Simulate ``n_trials`` repeat-until-success runs.

    Each run retries until the detector clicks (geometric in P); the
    heralded pair is the target state with probability F. Trials are drawn
    in fixed-size chunks, each from its own spawned stream, so the result
    depends only on ``seed`` and ``n_trials``.
    """
    p = figures.probability
    if not 0 < p <= 1:
        raise PreconditionError(f"success probability must be in (0, 1], got {p}")
    if n_trials < 1:
        raise PreconditionError("need at least one trial")
    f = figures.fidelity_or(0.0)
    n_chunks = -(-n_trials // CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    attempts = np.empty(n_trials, dtype=np.int64)
    hits = 0
    for i, ss in enumerate(streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        lo, hi = i * CHUNK, min((i + 1) * CHUNK, n_trials)
        attempts[lo:hi] = rng.geometric(p, hi - lo)
        hits += int(np.count_nonzero(rng.random(hi - lo) < f))
    var = float(attempts.var(ddof=1)) if n_trials > 1 else 0.0
    return AttemptStats(float(attempts.mean()), var, hits / n_trials, n_trials, seed)
