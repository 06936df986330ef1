from fractions import Fraction

import numpy as np

import pytest

from cavity_eo import response
from cavity_eo.errors import DegenerateResponseError, PreconditionError
from cavity_eo.model import SystemParams
from cavity_eo.response import (
    UNDEFINED,
    QubitState,
    TransmissionResult,
    blocking_transmission_probability,
    dispersive_phase,
    eo_figures,
    evaluate,
    steady_state_variables,
    transmission,
)

# Exact rationals from a symbolic evaluation of the closed forms (sympy).
EXACT = {
    (2, 2, 2, 9): dict(t_e=(Fraction(93, 97), Fraction(9, 97)), flux=Fraction(9458, 10185),
                       t_i_sq=Fraction(8, 10185), F=Fraction(109, 121), P=Fraction(121, 81480)),
    (4, 1, 0.1, 5): dict(t_e=(Fraction(2566, 2621), Fraction(250, 2621)),
                         flux=Fraction(4852668, 5013973), t_i_sq=Fraction(1300, 5013973),
                         F=Fraction(1939, 2017), P=Fraction(50425, 40111784)),
}


def test_blocking_example(blocking_point):
    x_c, x_s, flux = steady_state_variables(blocking_point)
    assert x_c == pytest.approx(0.5, abs=1e-15)
    assert x_s == pytest.approx(0.25, abs=1e-15)
    assert flux == pytest.approx(0.5, abs=1e-15)
    t = transmission(blocking_point)
    assert t.t_e == pytest.approx(0.5) and t.t_i_sq == pytest.approx(0.25, abs=1e-15)
    assert abs(t.t_e) ** 2 + t.t_i_sq == pytest.approx(blocking_transmission_probability(blocking_point))


def test_fig3_point_steady_state(fig3_point):
    x_c, _, flux = steady_state_variables(fig3_point)
    assert x_c == pytest.approx((6 + 18j) / (8 + 18j), abs=1e-15)
    assert flux == pytest.approx(0.928618, abs=1e-5)


@pytest.mark.parametrize("key", sorted(EXACT))
def test_against_exact_rationals(key):
    want = EXACT[key]
    t, figs = evaluate(SystemParams(*key))
    assert t.t_e.real == pytest.approx(float(want["t_e"][0]), rel=1e-14)
    assert t.t_e.imag == pytest.approx(float(want["t_e"][1]), rel=1e-13)
    assert t.t_i_sq == pytest.approx(float(want["t_i_sq"]), rel=1e-9)
    assert figs.fidelity == pytest.approx(float(want["F"]), rel=1e-12)
    assert figs.probability == pytest.approx(float(want["P"]), rel=1e-12)


def test_large_dephasing_makes_cavity_transparent():
    x_c, _, _ = steady_state_variables(SystemParams(kappa=1, gamma=0.5, gamma_p=1e9, delta=3))
    assert x_c == pytest.approx(1, abs=1e-8)


def test_qubit_zero_branch_is_exact():
    t = transmission(SystemParams(kappa=0, gamma=0, gamma_p=2), QubitState.ZERO)
    assert (t.t_e, t.t_i_sq) == (1, 0)
    assert transmission(SystemParams(3, 1, 2, 5), "zero").t_e == 1


def test_no_dephasing_no_inelastic():
    for k, ga, d in [(0.5, 0, 0), (3, 1, 2), (10, 4, -7)]:
        assert transmission(SystemParams(kappa=k, gamma=ga, gamma_p=0, delta=d)).t_i_sq <= 1e-12


def test_degenerate_response():
    with pytest.raises(DegenerateResponseError):
        steady_state_variables(SystemParams(kappa=0, gamma=0, gamma_p=1, delta=2))


def test_eo_figures_examples():
    figs = eo_figures(TransmissionResult(0.5, 0.25))
    assert figs.fidelity == pytest.approx(0.5) and figs.probability == pytest.approx(0.09375)
    figs = eo_figures(TransmissionResult(0, 0))
    assert figs.fidelity == 1 and figs.probability == pytest.approx(1 / 8)
    figs = eo_figures(TransmissionResult(1, 0))
    assert figs.fidelity is UNDEFINED and figs.probability == 0
    assert figs.as_dict()["fidelity"] == "undefined"


def test_blocking_transmission_probability():
    assert blocking_transmission_probability(SystemParams(kappa=1, gamma=0, gamma_p=2)) == 0.5
    assert blocking_transmission_probability(SystemParams(kappa=1, gamma=0, gamma_p=0)) == 0
    p = SystemParams(kappa=0.15, gamma=0, gamma_p=1)
    assert blocking_transmission_probability(p) == pytest.approx(0.15 / 2.15, rel=1e-14)
    with pytest.raises(PreconditionError):
        blocking_transmission_probability(SystemParams(kappa=1, gamma=0.1, gamma_p=2))


def test_dispersive_phase():
    assert dispersive_phase(SystemParams(kappa=2, gamma=0, gamma_p=0, delta=9)) == pytest.approx(1 / 18)
    assert dispersive_phase(SystemParams(kappa=2, gamma=0, gamma_p=0, delta=-9)) < 0
    assert dispersive_phase(SystemParams(kappa=2, gamma=0, gamma_p=0, delta=1e12)) < 1e-12
    with pytest.raises(PreconditionError):
        dispersive_phase(SystemParams(kappa=2, gamma=0, gamma_p=0, delta=0))
    with pytest.raises(PreconditionError):
        dispersive_phase(SystemParams(kappa=0, gamma=1, gamma_p=0, delta=3))


@pytest.mark.parametrize("s,f", [(0.15, 0.9022), (0.07, 0.9509)])
def test_homogeneous_broadening_closed_form(s, f):
    p = SystemParams(kappa=s / 2, gamma=0, gamma_p=2, delta=0)
    x_c, _, flux = steady_state_variables(p)
    assert flux == pytest.approx(x_c.real, abs=1e-12)
    got = evaluate(p)[1].fidelity
    assert got == pytest.approx((s + 4) / (4 + 4 * s), abs=1e-12)
    assert got == pytest.approx(f, abs=1e-3)


def test_far_detuned_elastic_modulus():
    t = transmission(SystemParams(kappa=2, gamma=2, gamma_p=2, delta=1e6))
    assert abs(abs(t.t_e) - 1) < 1e-4


def test_inelastic_flux_matches_flux_difference():
    rng = np.random.default_rng(8)
    for _ in range(500):
        k, ga, gp = rng.uniform(0, 10, 3)
        p = SystemParams(k, ga, gp, rng.uniform(-20, 20), g=rng.uniform(0.2, 3))
        x_c, _, flux = response.steady_state_variables(p)
        assert response.inelastic_flux(p) == pytest.approx(flux - abs(x_c) ** 2, abs=1e-11)
