"""Finite-pulse transmission via residue sums.

The input photon is a one-sided exponential wavepacket of length ``l``,
``f(-t) = sqrt(2/l) exp(-i delta_p t - t/l)``. Every response function the
protocol needs solves a 2x2 linear system driven (or not) by that pulse, so
its Laplace transform is rational and the time-domain function is a finite
sum of exponentials, one term per pole. Norms of such sums are closed-form.

Frequencies are measured in the frame rotating at the cavity frequency.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePolesError, DivergentSeriesError, NonIntegrableError, PreconditionError
from .model import SystemParams, complex_frequencies
from .response import EoFigures, figures_from_norms

log = logging.getLogger(__name__)

DEGENERACY_RTOL = 1e-8
IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class PoleSet:
    lambda1: complex
    lambda2: complex
    lambda3: complex
    degenerate: bool

    @property
    def all(self) -> tuple[complex, complex, complex]:
        return self.lambda1, self.lambda2, self.lambda3


@dataclass(frozen=True)
class ExpSum:
    """h(t) = sum_k c_k exp(s_k t) for t >= 0."""

    coefficients: tuple[complex, ...]
    exponents: tuple[complex, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.exponents):
            raise ValueError("coefficients and exponents differ in length")

    @property
    def terms(self) -> list[tuple[complex, complex]]:
        return list(zip(self.coefficients, self.exponents))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        c = np.asarray(self.coefficients, dtype=complex)
        s = np.asarray(self.exponents, dtype=complex)
        return (c * np.exp(np.multiply.outer(t, s))).sum(axis=-1)

    def at0(self) -> complex:
        return complex(sum(self.coefficients))

    def scale(self, factor: complex) -> "ExpSum":
        return ExpSum(tuple(factor * c for c in self.coefficients), self.exponents)

    def __add__(self, other: "ExpSum") -> "ExpSum":
        # identical exponents are merged so shared poles cancel exactly
        merged: dict[complex, complex] = {}
        for c, s in self.terms + other.terms:
            merged[s] = merged.get(s, 0j) + c
        return ExpSum(tuple(merged.values()), tuple(merged.keys()))

    def __neg__(self) -> "ExpSum":
        return self.scale(-1)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    @property
    def slowest_rate(self) -> float:
        return min(-s.real for s in self.exponents)


@dataclass(frozen=True)
class Correlations:
    alpha_q: ExpSum
    alpha_c: ExpSum
    beta_q: ExpSum
    beta_c: ExpSum
    poles: PoleSet


@dataclass(frozen=True)
class NormBundle:
    n_elastic_diff: float
    n_inelastic_sum: float
    l: float
    norms: dict = field(default_factory=dict)


def _close(a: complex, b: complex) -> bool:
    return abs(a - b) < DEGENERACY_RTOL * max(abs(a), abs(b), 1.0)


def qubit_cavity_roots(params: SystemParams) -> tuple[complex, complex]:
    """Roots of (z + i w_q)(z + i w_c) + g^2 = 0."""
    wq, wc, _ = complex_frequencies(params)
    root = cmath.sqrt((wq - wc) ** 2 + 4 * params.g ** 2)
    return -0.5j * (wq + wc - root), -0.5j * (wq + wc + root)


def pulse_pole(params: SystemParams, l: float) -> complex:
    return complex(-1.0 / l, -params.delta_p)


def poles(params: SystemParams, l: float) -> PoleSet:
    if not l > 0:
        raise PreconditionError(f"pulse length must be positive, got {l}")
    l1, l2 = qubit_cavity_roots(params)
    l3 = pulse_pole(params, l)
    degenerate = _close(l1, l2) or _close(l1, l3) or _close(l2, l3)
    return PoleSet(l1, l2, l3, degenerate)


def residue_sum(numerator, roots) -> ExpSum:
    """Inverse Laplace transform of numerator(z) / prod_k (z - roots_k)
    for simple roots, as an exponential sum."""
    coefs = []
    for k, rk in enumerate(roots):
        den = 1.0 + 0j
        for j, rj in enumerate(roots):
            if j != k:
                den *= rk - rj
        coefs.append(complex(numerator(rk)) / den)
    return ExpSum(tuple(coefs), tuple(complex(r) for r in roots))


def _check_decay(roots, what: str):
    for r in roots:
        if not r.real < 0:
            raise NonIntegrableError(f"{what}: pole {r} does not decay")


def correlation_functions(params: SystemParams, l: float) -> Correlations:
    """alpha_q, alpha_c (free decay from an excited qubit) and beta_q, beta_c
    (response to the input pulse) as exponential sums."""
    ps = poles(params, l)
    if ps.degenerate:
        raise DegeneratePolesError(
            f"coincident poles {ps.all}; use the quadrature path (cavity_eo.oracle)"
        )
    _check_decay(ps.all, "correlation functions")
    wq, wc, _ = complex_frequencies(params)
    g = params.g
    drive = -1j * (params.kappa / l) ** 0.5
    pair = (ps.lambda1, ps.lambda2)
    return Correlations(
        alpha_q=residue_sum(lambda z: z + 1j * wc, pair),
        alpha_c=residue_sum(lambda z: -1j * g, pair),
        beta_q=residue_sum(lambda z: drive * (-1j * g), ps.all),
        beta_c=residue_sum(lambda z: drive * (z + 1j * wq), ps.all),
        poles=ps,
    )


def empty_cavity_beta_c(params: SystemParams, l: float) -> ExpSum:
    """Cavity response to the pulse with the qubit decoupled."""
    if params.kappa == 0:
        return ExpSum((), ())  # a closed mirror never admits the pulse
    _, wc, _ = complex_frequencies(params)
    roots = (-1j * wc, pulse_pole(params, l))
    if _close(*roots):
        raise DegeneratePolesError(f"empty-cavity pole coincides with pulse pole {roots[1]}")
    _check_decay(roots, "empty-cavity response")
    drive = -1j * (params.kappa / l) ** 0.5
    return residue_sum(lambda z: drive, roots)


def norm_of_expsum(h: ExpSum) -> float:
    """Closed-form integral of |h(t)|^2 over [0, inf)."""
    c = np.asarray(h.coefficients, dtype=complex)
    s = np.asarray(h.exponents, dtype=complex)
    if c.size == 0:
        return 0.0
    if np.any(s.real >= 0):
        raise NonIntegrableError(f"exponent with non-negative real part in {s}")
    gram = -np.outer(c, c.conj()) / np.add.outer(s, s.conj())
    total = gram.sum()
    scale = np.abs(gram).sum()
    if abs(total.imag) > IMAG_RESIDUE_TOL * max(scale, 1.0):
        raise ArithmeticError(f"norm has imaginary residue {total.imag:.3e}")
    return max(float(total.real), 0.0)


def _series_ratio(params: SystemParams, n_alpha_q: float) -> float:
    r = 2 * params.gamma_p * n_alpha_q
    if r >= 1 - 1e-12:
        raise DivergentSeriesError(
            f"environmental-excitation series ratio {r:.6g} >= 1 "
            "(no loss channel besides dephasing)"
        )
    return r


def _residue_norms(params: SystemParams, l: float) -> dict:
    cf = correlation_functions(params, l)
    bar = empty_cavity_beta_c(params, l)
    return {
        "alpha_q": norm_of_expsum(cf.alpha_q),
        "alpha_c": norm_of_expsum(cf.alpha_c),
        "beta_q": norm_of_expsum(cf.beta_q),
        "beta_c_diff": norm_of_expsum(bar - cf.beta_c),
    }


def _quadrature_norms(params: SystemParams, l: float) -> dict:
    from . import oracle

    log.debug("degenerate poles at %s, l=%g: using quadrature norms", params, l)
    return oracle.correlation_norms(params, l)


def response_norms(params: SystemParams, l: float) -> dict:
    """Norms of alpha_q, alpha_c, beta_q and (empty - loaded) beta_c.

    Coincident poles fall back to numerical quadrature.
    """
    try:
        return _residue_norms(params, l)
    except DegeneratePolesError:
        return _quadrature_norms(params, l)


def _elastic(params: SystemParams, norms: dict) -> float:
    return params.kappa / 2 * norms["beta_c_diff"]


def _inelastic(params: SystemParams, norms: dict) -> float:
    if params.gamma_p == 0:
        return 0.0
    r = _series_ratio(params, norms["alpha_q"])
    return params.kappa * params.gamma_p * norms["beta_q"] * norms["alpha_c"] / (1 - r)


def elastic_difference_norm(params: SystemParams, l: float) -> float:
    """Norm of the difference between empty- and loaded-cavity elastic
    transmission wavefunctions; tends to |1 - t_e|^2 for long pulses."""
    return _elastic(params, response_norms(params, l))


def inelastic_sum(params: SystemParams, l: float) -> float:
    """Total norm of all inelastic components, summed in closed form over
    the number of bath excitations; tends to |t_i|^2 for long pulses."""
    return _inelastic(params, response_norms(params, l))


def norm_bundle(params: SystemParams, l: float) -> NormBundle:
    norms = response_norms(params, l)
    return NormBundle(_elastic(params, norms), _inelastic(params, norms), l, norms)


def finite_pulse_figures(params: SystemParams, l: float) -> EoFigures:
    nb = norm_bundle(params, l)
    return figures_from_norms(nb.n_elastic_diff, nb.n_inelastic_sum)
