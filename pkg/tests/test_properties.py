"""Randomised invariants of the response, pulse and circuit layers."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cavity_eo import circuit, pulsed, response
from cavity_eo.model import SystemParams

rate = st.floats(0, 20, allow_nan=False)
detuning = st.floats(-50, 50, allow_nan=False)


def params_strategy(kappa_min=1e-3):
    return st.builds(SystemParams, kappa=st.floats(kappa_min, 20), gamma=rate, gamma_p=rate,
                     delta=detuning)


@settings(max_examples=200, deadline=None)
@given(params_strategy(), st.floats(1e-3, 1e3))
def test_scale_invariance(p, c):
    assume(p.gamma + p.gamma_p > 1e-6 or p.delta != 0)
    a = response.evaluate(p)[1]
    b = response.evaluate(SystemParams(c * p.kappa, c * p.gamma, c * p.gamma_p, c * p.delta, g=c))[1]
    assert b.probability == pytest.approx(a.probability, rel=1e-10, abs=1e-12)
    if a.defined:
        assert b.fidelity == pytest.approx(a.fidelity, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(params_strategy())
def test_detuning_sign_symmetry(p):
    assume(p.gamma + p.gamma_p > 1e-6 or p.delta != 0)
    a = response.evaluate(p)[1]
    b = response.evaluate(p.replace(delta=-p.delta))[1]
    assert b.probability == pytest.approx(a.probability, abs=1e-12)
    assert b.fidelity_or(-1) == pytest.approx(a.fidelity_or(-1), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 20), rate, detuning)
def test_no_dephasing_gives_perfect_or_undefined_fidelity(k, ga, d):
    assume(ga > 0 or d != 0)
    t, f = response.evaluate(SystemParams(k, ga, 0.0, d))
    assert t.t_i_sq <= 1e-12
    assert (not f.defined) or f.fidelity == pytest.approx(1, abs=1e-12)


def test_flux_bound_dense_sample():
    rng = np.random.default_rng(2024)
    worst = -np.inf
    for _ in range(10_000):
        k, ga, gp = rng.uniform(0, 20, 3)
        d = rng.uniform(-50, 50)
        t = response.transmission(SystemParams(k, ga, gp, d))
        worst = max(worst, abs(t.t_e) ** 2 + t.t_i_sq)
    assert worst <= 1 + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5), st.floats(0, 5), st.floats(0, 5), st.floats(-10, 10),
       st.floats(0.1, 200))
def test_finite_pulse_figures_bounded(k, ga, gp, d, l):
    p = SystemParams(k, ga, gp, d)
    f = pulsed.finite_pulse_figures(p, l)
    assert 0 <= f.probability <= 0.125 + 1e-12
    assert (not f.defined) or 0 <= f.fidelity <= 1
    n = pulsed.response_norms(p, l)
    assert (ga + 2 * gp) * n["alpha_q"] + k * n["alpha_c"] == pytest.approx(1, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 2 * np.pi), st.floats(0, 1))
def test_circuit_matches_closed_form(r, phi, u):
    t_e = np.sqrt(r) * np.exp(1j * phi)
    t = response.TransmissionResult(complex(t_e), u * (1 - r))
    ref = response.eo_figures(t)
    got = circuit.protocol_figures(t)
    assert got.probability == pytest.approx(ref.probability, abs=1e-12)
    if ref.defined and got.defined:
        assert got.fidelity == pytest.approx(ref.fidelity, abs=1e-12)
