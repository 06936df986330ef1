"""Brute-force reference path.

Nothing here uses the pole/residue machinery of :mod:`cavity_eo.pulsed`:

* correlation functions come from adaptive Runge-Kutta integration of the
  raw equations of motion;
* norms come from adaptive quadrature of |h(t)|^2, with h evaluated by a
  matrix exponential of the (pulse-augmented) generator, which stays valid
  at coincident poles.

:func:`run_checks` compares both paths and is what ``cavity-eo oracle-check``
reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .errors import NonIntegrableError, PreconditionError, QuadratureError, StiffnessError
from .model import SystemParams, complex_frequencies

TAIL_FACTOR = 50.0


# -- adaptive Runge-Kutta ---------------------------------------------------

# Dormand-Prince 5(4), FSAL
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_E = _B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def dopri54(f, t0: float, y0, t_end: float, rtol: float = 1e-10, atol: float | None = None,
            t_eval=None, h0: float | None = None, max_steps: int = 10_000_000):
    """Integrate y' = f(t, y) from t0 to t_end with PI step control.

    Returns (ts, ys). With ``t_eval`` the integrator lands exactly on every
    requested time and only those are returned; otherwise every accepted step
    is returned.
    """
    atol = rtol * 1e-2 if atol is None else atol
    y = np.asarray(y0, dtype=complex).copy()
    t = float(t0)
    if t_eval is not None:
        targets = [float(x) for x in np.asarray(t_eval, dtype=float)]
        if any(b <= a for a, b in zip(targets, targets[1:])):
            raise PreconditionError("t_eval must be strictly increasing")
        t_end = targets[-1]
    else:
        targets = None
    ts, ys = [], []
    if targets is None or (targets and targets[0] == t):
        ts.append(t)
        ys.append(y.copy())
    next_i = 1 if targets is not None and targets and targets[0] == t else 0

    k1 = f(t, y)
    k = np.empty((7, y.size), dtype=complex)
    span = t_end - t
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
        d1 = np.sqrt(np.mean(np.abs(k1 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h0, span) if span > 0 else 0.0
    err_prev = 1e-4
    steps = 0
    while t < t_end:
        steps += 1
        if steps > max_steps:
            raise StiffnessError("step budget exhausted")
        stop = t_end if targets is None else targets[next_i]
        land = False
        # stretch slightly rather than leave a sliver before the target
        if t + 1.1 * h >= stop:
            h = stop - t
            land = True
        if h <= 16 * np.spacing(max(abs(t), 1.0)):
            raise StiffnessError(f"step size underflow at t={t:.6g}")
        k[0] = k1
        for i in range(1, 7):
            k[i] = f(t + _C[i] * h, y + h * (_A[i, :i] @ k[:i]))
        y_new = y + h * (_B @ k)
        err_vec = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))
        if err <= 1.0:
            t = stop if land else t + h
            y = y_new
            k1 = k[6].copy()
            if targets is None or land:
                ts.append(t)
                ys.append(y.copy())
                if targets is not None:
                    next_i += 1
                    if next_i == len(targets):
                        break
            err = max(err, 1e-10)
            fac = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
            err_prev = err
            h_next = h * min(5.0, max(0.2, fac))
            # a landing step may be artificially short; do not shrink from it
            h = max(h_next, h) if land else h_next
        else:
            h *= max(0.2, 0.9 * err ** (-1 / 5))
    return np.asarray(ts), np.asarray(ys)


@dataclass(frozen=True)
class OdeSolution:
    t: np.ndarray
    values: np.ndarray  # shape (n, 2): q-component, c-component
    tol: float

    @property
    def q(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def c(self) -> np.ndarray:
        return self.values[:, 1]


def _generator(params: SystemParams) -> np.ndarray:
    wq, wc, _ = complex_frequencies(params)
    g = params.g
    return np.array([[-1j * wq, -1j * g], [-1j * g, -1j * wc]])


def pulse_amplitude(params: SystemParams, l: float, t):
    """f(-t) for the one-sided exponential input, t >= 0, cavity frame."""
    return math.sqrt(2 / l) * np.exp(complex(-1 / l, -params.delta_p) * np.asarray(t, dtype=float))


def integrate_correlations(params: SystemParams, l: float, t_max: float, tol: float = 1e-10,
                           t_eval=None) -> tuple[OdeSolution, OdeSolution]:
    """Integrate the free (alpha) and pulse-driven (beta) equations of motion."""
    if not t_max > 0:
        raise PreconditionError("t_max must be positive")
    if not 1e-12 <= tol <= 1e-6:
        raise PreconditionError("tol must lie in [1e-12, 1e-6]")
    if not l > 0:
        raise PreconditionError("pulse length must be positive")
    A = _generator(params)
    drive = -1j * math.sqrt(params.kappa / 2)
    s3 = complex(-1 / l, -params.delta_p)
    amp = math.sqrt(2 / l)

    def f_alpha(t, y):
        return A @ y

    def f_beta(t, y):
        out = A @ y
        out[1] += drive * amp * np.exp(s3 * t)
        return out

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval[0] < 0 or t_eval[-1] > t_max:
            raise PreconditionError("t_eval must lie in [0, t_max]")
        if t_eval[0] > 0:
            t_eval = np.concatenate([[0.0], t_eval])
            drop = 1
        else:
            drop = 0
    ta, ya = dopri54(f_alpha, 0.0, [1, 0], t_max, rtol=tol, t_eval=t_eval)
    tb, yb = dopri54(f_beta, 0.0, [0, 0], t_max, rtol=tol, t_eval=t_eval)
    if t_eval is not None and drop:
        ta, ya, tb, yb = ta[1:], ya[1:], tb[1:], yb[1:]
    return OdeSolution(ta, ya, tol), OdeSolution(tb, yb, tol)


# -- quadrature -------------------------------------------------------------


def _segments(cutoff: float, fast: float) -> np.ndarray:
    first = min(0.1 / fast, cutoff / 4)
    n = max(4, int(math.ceil(4 * math.log10(cutoff / first))) + 1)
    return np.concatenate([[0.0], np.geomspace(first, cutoff, n)])


def quadrature_norm(h, cutoff: float, tol: float = 1e-11, decay_rate: float | None = None,
                    fast_rate: float = 1.0):
    """Integral of |h(t)|^2 on [0, cutoff] plus an exponential tail estimate.

    ``h`` is a callable (scalar or vector valued) or a ``(t, samples)`` pair;
    samples are integrated with Simpson's rule and carry no tail estimate.
    Returns ``(value, error_estimate)``; vector-valued ``h`` gives arrays.
    """
    if not callable(h):
        t, y = h
        t = np.asarray(t, dtype=float)
        y2 = np.abs(np.asarray(y)) ** 2
        val = integrate.simpson(y2, x=t, axis=0)
        return val, np.full_like(np.asarray(val, dtype=float), np.nan)
    if decay_rate is None or not decay_rate > 0:
        raise NonIntegrableError("integrand does not decay (need a positive decay rate)")

    def sq(t):
        return np.abs(np.asarray(h(t))) ** 2

    edges = _segments(cutoff, max(fast_rate, decay_rate))
    # coarse pass fixes a per-component scale so the fine pass is relative
    coarse = sum(integrate.quad_vec(sq, a, b, epsrel=1e-4, norm="max")[0]
                 for a, b in zip(edges[:-1], edges[1:]))
    coarse = np.asarray(coarse, dtype=float)
    weight = np.where(coarse > 0, 1 / np.where(coarse > 0, coarse, 1), 1.0)
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad_vec(lambda t: sq(t) * weight, a, b, epsabs=0, epsrel=tol / 10,
                                  norm="max", limit=400)
        total = total + v
        err = err + e
    total = np.asarray(total) / weight
    tail_t = cutoff * np.linspace(0.95, 1.0, 6)
    tail = np.max(np.stack([sq(x) for x in tail_t]), axis=0) / (2 * decay_rate)
    bad = tail > tol * np.maximum(total, 1e-300)
    if np.any(bad & (tail > 1e-300)):
        raise QuadratureError(f"cutoff {cutoff:g} too short: tail estimate {np.max(tail):.3e}")
    total = total + tail
    error = np.asarray(err) / weight + tail
    if np.ndim(total) == 0:
        return float(total), float(error)
    return total, error


def _augmented(params: SystemParams, l: float) -> np.ndarray:
    """Block generator for [alpha_q, alpha_c, beta_q, beta_c, beta_c_empty, pulse]."""
    wq, wc, _ = complex_frequencies(params)
    g = params.g
    d = -1j * math.sqrt(params.kappa / l)  # -i sqrt(kappa/2) * sqrt(2/l)
    M = np.zeros((6, 6), dtype=complex)
    M[:2, :2] = [[-1j * wq, -1j * g], [-1j * g, -1j * wc]]
    M[2:4, 2:4] = M[:2, :2]
    M[3, 5] = d
    M[4, 4] = -1j * wc
    M[4, 5] = d
    M[5, 5] = complex(-1 / l, -params.delta_p)
    return M


def _rates(params: SystemParams, l: float) -> tuple[float, float]:
    M = _augmented(params, l)
    # eigenvalues are only used to size the integration window
    ev = np.linalg.eigvals(M)
    re = -ev.real
    if np.any(re <= 0):
        raise NonIntegrableError(f"non-decaying mode in spectrum {ev}")
    fast = float(max(np.max(re), np.max(np.abs(ev.imag))))
    return float(np.min(re)), fast


def correlation_callable(params: SystemParams, l: float):
    """t -> [alpha_q, alpha_c, beta_q, beta_c, beta_c_empty] by matrix exponential."""
    M = _augmented(params, l)
    x0 = np.array([1, 0, 0, 0, 0, 1], dtype=complex)

    def h(t):
        return (linalg.expm(M * float(t)) @ x0)[:5]

    return h


def correlation_norms(params: SystemParams, l: float, tol: float = 1e-11) -> dict:
    """Quadrature norms keyed like the residue path in :mod:`pulsed`."""
    slow, fast = _rates(params, l)
    base = correlation_callable(params, l)

    def h(t):
        v = base(t)
        return np.array([v[0], v[1], v[2], v[4] - v[3]])

    vals, _ = quadrature_norm(h, TAIL_FACTOR / slow, tol, decay_rate=slow, fast_rate=fast)
    return {"alpha_q": float(vals[0]), "alpha_c": float(vals[1]),
            "beta_q": float(vals[2]), "beta_c_diff": float(vals[3])}


def truncated_inelastic_sum(params: SystemParams, l: float, n_max: int = 4,
                            norms: dict | None = None) -> list[float]:
    """Norms of the first ``n_max`` inelastic wavefunctions.

    The n-excitation wavefunction is a time-ordered product of one-time
    functions, so its norm factorises into quadrature norms.
    """
    if not 1 <= n_max <= 4:
        raise PreconditionError("n_max must lie in [1, 4]")
    if params.gamma_p == 0:
        return [0.0] * n_max
    n = norms if norms is not None else correlation_norms(params, l)
    k, gp = params.kappa, params.gamma_p
    return [k / 2 * (2 * gp) ** m * n["beta_q"] * n["alpha_q"] ** (m - 1) * n["alpha_c"]
            for m in range(1, n_max + 1)]
