"""Cross-validation of the analytic paths against the brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import circuit, oracle, pulsed, response
from .model import SystemParams

DEFAULT_TOLERANCES = {
    "residue_vs_ode": 1e-8,
    "norm_vs_quadrature": 1e-9,
    "circuit_probability": 1e-12,
    "circuit_fidelity": 1e-12,
    "inelastic_ratio": 1e-6,
    "inelastic_tail_bound": 1.0,
    "initial_conditions": 1e-12,
    "rabi_analytic": 1e-8,
    "critical_analytic": 1e-8,
    "long_pulse_limit": 1e-3,
    "loss_balance": 1e-12,
}


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    n: int

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def random_params(rng: np.random.Generator) -> SystemParams:
    """Draw a generic dissipative point with distinct poles."""
    while True:
        k, ga, gp = rng.uniform(0, 5, 3)
        p = SystemParams(kappa=k, gamma=ga, gamma_p=gp, delta=rng.uniform(-10, 10),
                         delta_p=rng.uniform(-1, 1))
        if k + ga + 2 * gp > 0.1 and k > 0.05:
            return p


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def draws(seed: int, n: int) -> list[tuple[SystemParams, float]]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = random_params(rng)
        l = float(rng.uniform(0.5, 50))
        if not pulsed.poles(p, l).degenerate:
            out.append((p, l))
    return out


def residue_vs_ode(p: SystemParams, l: float, tol: float = 1e-10) -> float:
    cf = pulsed.correlation_functions(p, l)
    slow = min(-x.real for x in cf.poles.all)
    t_max = min(10 / slow, 60.0)
    t = np.linspace(0, t_max, 100)
    a, b = oracle.integrate_correlations(p, l, t_max, tol, t_eval=t)
    return float(max(np.max(np.abs(a.q - cf.alpha_q(t))), np.max(np.abs(a.c - cf.alpha_c(t))),
                     np.max(np.abs(b.q - cf.beta_q(t))), np.max(np.abs(b.c - cf.beta_c(t)))))


def norms_vs_quadrature(p: SystemParams, l: float) -> float:
    res = pulsed._residue_norms(p, l)
    quad = oracle.correlation_norms(p, l)
    return max(_rel(res[k], quad[k]) for k in res)


def circuit_vs_closed_form(t: response.TransmissionResult) -> tuple[float, float]:
    closed = response.eo_figures(t)
    state = circuit.run_interferometer(t)
    p = circuit.click_probability(state)
    f = circuit.fidelity(circuit.reduced_density_matrix(state))
    return abs(p - closed.probability), abs(f - closed.fidelity)


def random_transmission(rng: np.random.Generator) -> response.TransmissionResult:
    r = math.sqrt(rng.uniform(0, 1))
    t_e = r * complex(math.cos(phi := rng.uniform(0, 2 * math.pi)), math.sin(phi))
    return response.TransmissionResult(t_e, rng.uniform(0, 1 - r * r))


def run_checks(seed: int = 0, n_draws: int = 10, tolerances: dict | None = None,
               tol_override: float | None = None) -> list[Check]:
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    if tol_override is not None:
        tols = {k: tol_override for k in tols}
    pts = draws(seed, n_draws)
    rng = np.random.default_rng(seed + 1)
    out = []

    out.append(Check("residue_vs_ode", max(residue_vs_ode(p, l) for p, l in pts),
                     tols["residue_vs_ode"], len(pts)))

    norm_res, ratio_res, tail_res, ic_res, balance = 0.0, 0.0, 0.0, 0.0, 0.0
    for p, l in pts:
        res = pulsed._residue_norms(p, l)
        quad = oracle.correlation_norms(p, l)
        norm_res = max(norm_res, max(_rel(res[k], quad[k]) for k in res))
        terms = oracle.truncated_inelastic_sum(p, l, 4, norms=quad)
        r = 2 * p.gamma_p * res["alpha_q"]
        if terms[0] > 0:
            ratio_res = max(ratio_res, max(_rel(terms[n + 1] / terms[n], r) for n in (0, 1)))
            closed = pulsed.inelastic_sum(p, l)
            bound = closed * r ** 4 / (1 - r)
            tail_res = max(tail_res, abs(sum(terms) - closed) / bound if bound > 0 else 0.0)
        cf = pulsed.correlation_functions(p, l)
        ic_res = max(ic_res, abs(cf.alpha_q.at0() - 1), abs(cf.alpha_c.at0()),
                     abs(cf.beta_q.at0()), abs(cf.beta_c.at0()))
        # excitation leaves only through gamma, 2 gamma_p and kappa
        balance = max(balance, abs((p.gamma + 2 * p.gamma_p) * res["alpha_q"]
                                   + p.kappa * res["alpha_c"] - 1))
    out.append(Check("norm_vs_quadrature", norm_res, tols["norm_vs_quadrature"], len(pts)))
    out.append(Check("inelastic_ratio", ratio_res, tols["inelastic_ratio"], len(pts)))
    out.append(Check("inelastic_tail_bound", tail_res, tols["inelastic_tail_bound"], len(pts)))
    out.append(Check("initial_conditions", ic_res, tols["initial_conditions"], len(pts)))
    out.append(Check("loss_balance", balance, tols["loss_balance"], len(pts)))

    dp, df = 0.0, 0.0
    n_circ = max(4 * n_draws, 20)
    for _ in range(n_circ):
        t = random_transmission(rng)
        a, b = circuit_vs_closed_form(t)
        dp, df = max(dp, a), max(df, b)
    out.append(Check("circuit_probability", dp, tols["circuit_probability"], n_circ))
    out.append(Check("circuit_fidelity", df, tols["circuit_fidelity"], n_circ))

    t = np.linspace(0, 20, 81)
    a, _ = oracle.integrate_correlations(SystemParams(0, 0, 0, 0), 1.0, 20, 1e-11, t_eval=t)
    out.append(Check("rabi_analytic", float(np.max(np.abs(a.q - np.cos(t)))), tols["rabi_analytic"], 1))
    a, _ = oracle.integrate_correlations(SystemParams(4, 0, 0, 0), 1.0, 20, 1e-11, t_eval=t)
    out.append(Check("critical_analytic", float(np.max(np.abs(a.q - np.exp(-t) * (1 + t)))),
                     tols["critical_analytic"], 1))

    lp = 0.0
    for p in (SystemParams(2, 2, 2, 9), SystemParams(1, 0, 2, 0)):
        fin = pulsed.finite_pulse_figures(p, 1e4 / p.kappa)
        ref = response.evaluate(p)[1]
        lp = max(lp, _rel(fin.probability, ref.probability), _rel(fin.fidelity, ref.fidelity))
    out.append(Check("long_pulse_limit", lp, tols["long_pulse_limit"], 2))
    return out


def report(checks: list[Check], seed: int, n_draws: int) -> dict:
    return {
        "seed": seed,
        "n_draws": n_draws,
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
