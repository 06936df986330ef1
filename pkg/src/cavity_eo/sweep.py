"""Parameter-space sweeps, contour extraction and inverse design."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from . import pulsed, response
from .errors import BracketError, CavityEOError, InfeasibleError, PreconditionError, ValidationError
from .model import SystemParams
from .response import UNDEFINED, EoFigures, TransmissionResult

log = logging.getLogger(__name__)

AXIS_NAMES = ("kappa", "gamma", "gamma_p", "delta", "delta_p", "l")
CSV_HEADER = ("x", "y", "F", "P", "t_e_re", "t_e_im", "t_i_sq")
SEARCH_TOL = 1e-4
LEVEL_TOL = 1e-4


@dataclass(frozen=True)
class Engine:
    """``long-pulse`` closed forms, or ``finite-pulse`` with pulse length ``l``."""

    kind: str = "long-pulse"
    l: float | None = None

    def __post_init__(self):
        if self.kind not in ("long-pulse", "finite-pulse"):
            raise ValidationError("engine", f"unknown engine {self.kind!r}")
        if self.kind == "finite-pulse" and not (self.l is not None and self.l > 0):
            raise ValidationError("pulse_length", "finite-pulse engine needs l > 0")

    @classmethod
    def finite(cls, l: float) -> "Engine":
        return cls("finite-pulse", float(l))

    def label(self) -> str:
        return self.kind if self.l is None else f"{self.kind}(l={self.l:g})"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "l": self.l}

    def evaluate(self, params: SystemParams, l: float | None = None) -> tuple[TransmissionResult | None, EoFigures]:
        if self.kind == "long-pulse" and l is None:
            return response.evaluate(params)
        return None, pulsed.finite_pulse_figures(params, self.l if l is None else l)


LONG_PULSE = Engine()


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValidationError("axis", f"unknown axis {self.name!r}")
        if self.scale not in ("linear", "log"):
            raise ValidationError("axis", f"unknown scale {self.scale!r}")
        if self.count < 1 or (self.count == 1 and self.min != self.max):
            raise ValidationError("axis", f"{self.name}: count must be >= 2 (or 1 with min == max)")
        if self.scale == "log" and self.min <= 0:
            raise ValidationError("axis", f"{self.name}: log scale needs min > 0")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def to_internal(self, v):
        return np.log(v) if self.scale == "log" else v

    def from_internal(self, u):
        return np.exp(u) if self.scale == "log" else u

    def as_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max,
                "count": self.count, "scale": self.scale}


@dataclass
class SweepGrid:
    x_axis: Axis
    y_axis: Axis
    fixed: SystemParams
    engine: Engine
    fidelity: np.ndarray  # (ny, nx); NaN where undefined or failed
    probability: np.ndarray
    defined: np.ndarray  # bool
    t_e: np.ndarray | None = None
    t_i_sq: np.ndarray | None = None
    errors: dict = field(default_factory=dict)  # (j, i) -> message

    @property
    def x(self) -> np.ndarray:
        return self.x_axis.values()

    @property
    def y(self) -> np.ndarray:
        return self.y_axis.values()

    def cell(self, j: int, i: int) -> EoFigures:
        f = self.fidelity[j, i] if self.defined[j, i] else UNDEFINED
        return EoFigures(f, float(self.probability[j, i]))

    def field(self, name: str) -> np.ndarray:
        if name in ("F", "fidelity"):
            return self.fidelity
        if name in ("P", "probability"):
            return self.probability
        raise ValidationError("field", f"unknown field {name!r}")

    def nearest(self, x: float, y: float) -> tuple[int, int]:
        i = int(np.argmin(np.abs(self.x_axis.to_internal(self.x) - self.x_axis.to_internal(x))))
        j = int(np.argmin(np.abs(self.y_axis.to_internal(self.y) - self.y_axis.to_internal(y))))
        return j, i

    def params_at(self, x: float, y: float) -> tuple[SystemParams, float | None]:
        return _point(self.fixed, self.engine, {self.x_axis.name: x, self.y_axis.name: y})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for j, yv in enumerate(self.y):
            for i, xv in enumerate(self.x):
                if (j, i) in self.errors:
                    w.writerow([repr(float(xv)), repr(float(yv)), "error", "error", "", "", ""])
                    continue
                f = repr(float(self.fidelity[j, i])) if self.defined[j, i] else "undefined"
                row = [repr(float(xv)), repr(float(yv)), f, repr(float(self.probability[j, i]))]
                if self.t_e is not None:
                    te = self.t_e[j, i]
                    row += [repr(float(te.real)), repr(float(te.imag)), repr(float(self.t_i_sq[j, i]))]
                else:
                    row += ["", "", ""]
                w.writerow(row)
        return buf.getvalue()


def _point(fixed: SystemParams, engine: Engine, values: dict) -> tuple[SystemParams, float | None]:
    changes = {k: float(v) for k, v in values.items() if k != "l"}
    l = values.get("l")
    if l is not None and engine.kind != "finite-pulse":
        raise ValidationError("axis", "sweeping l requires the finite-pulse engine")
    return fixed.replace(**changes), (float(l) if l is not None else None)


def worker_count() -> int:
    raw = os.environ.get("CAVITY_EO_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValidationError("CAVITY_EO_THREADS", f"not an integer: {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def grid_sweep(x_axis: Axis, y_axis: Axis, fixed: SystemParams, engine: Engine = LONG_PULSE,
               workers: int | None = None) -> SweepGrid:
    """Evaluate F and P on every grid cell. Per-cell failures are recorded
    in ``errors`` and never abort the sweep."""
    xs, ys = x_axis.values(), y_axis.values()
    ny, nx = len(ys), len(xs)
    fid = np.full((ny, nx), np.nan)
    prob = np.full((ny, nx), np.nan)
    defined = np.zeros((ny, nx), dtype=bool)
    long = engine.kind == "long-pulse"
    t_e = np.full((ny, nx), np.nan + 0j) if long else None
    t_i = np.full((ny, nx), np.nan) if long else None
    errors: dict = {}

    def row(j):
        out = []
        for i in range(nx):
            try:
                params, l = _point(fixed, engine, {x_axis.name: xs[i], y_axis.name: ys[j]})
                out.append((i, engine.evaluate(params, l), None))
            except CavityEOError as exc:
                out.append((i, None, f"{type(exc).__name__}: {exc}"))
        return j, out

    n = workers or worker_count()
    if n > 1 and ny > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(row, range(ny)))
    else:
        rows = [row(j) for j in range(ny)]
    for j, cells in rows:
        for i, res, err in cells:
            if err is not None:
                errors[(j, i)] = err
                continue
            tr, figs = res
            prob[j, i] = figs.probability
            if figs.defined:
                fid[j, i] = figs.fidelity
                defined[j, i] = True
            if long:
                t_e[j, i] = tr.t_e
                t_i[j, i] = tr.t_i_sq
    return SweepGrid(x_axis, y_axis, fixed, engine, fid, prob, defined, t_e, t_i, errors)


def pulse_scan(params: SystemParams, lengths) -> list[tuple[float, EoFigures]]:
    return [(float(l), pulsed.finite_pulse_figures(params, float(l))) for l in lengths]


# -- contours ---------------------------------------------------------------


@dataclass(frozen=True)
class ContourLine:
    level: float
    points: list  # [(x, y), ...]

    def as_dict(self) -> dict:
        return {"level": self.level, "points": [[float(x), float(y)] for x, y in self.points]}


def _field_value(figs: EoFigures, name: str) -> float:
    if name in ("F", "fidelity"):
        return figs.fidelity_or(math.nan)
    return figs.probability


def _bisect_edge(fn, a: float, b: float, fa: float, level: float, guess: float) -> float:
    """Bisection for fn(u) = level on [a, b]; fn(a) - level has sign of fa."""
    lo, hi = a, b
    u = guess
    for _ in range(200):
        v = fn(u) - level
        if abs(v) < LEVEL_TOL / 2 or hi - lo < 1e-13 * max(1.0, abs(hi)):
            return u
        if (v < 0) == (fa < 0):
            lo = u
        else:
            hi = u
        u = 0.5 * (lo + hi)
    return u


def contour(grid: SweepGrid, field_name: str, level: float, refine: bool = True) -> list[ContourLine]:
    """Iso-lines of F or P by marching squares, each vertex refined onto the
    true level set along its grid edge."""
    data = np.array(grid.field(field_name), dtype=float)
    mask = np.isfinite(data)
    if not mask.any():
        return []
    lo, hi = np.nanmin(data), np.nanmax(data)
    if not lo <= level <= hi or lo == hi:
        return []
    data = np.where(mask, data, np.nanmean(data))
    xs_u = grid.x_axis.to_internal(grid.x)
    ys_u = grid.y_axis.to_internal(grid.y)
    lines = []
    for path in measure.find_contours(data, level, mask=mask):
        pts = []
        for r, c in path:
            pts.append(_refine_vertex(grid, field_name, level, data, xs_u, ys_u, r, c, refine))
        pts = [p for k, p in enumerate(pts) if k == 0 or p != pts[k - 1]]
        if pts:
            lines.append(ContourLine(level, pts))
    return lines


def _refine_vertex(grid, field_name, level, data, xs_u, ys_u, r, c, refine):
    rf, cf = math.floor(r), math.floor(c)
    on_row = abs(r - round(r)) < 1e-9
    if on_row:
        j = int(round(r))
        i0 = min(cf, len(xs_u) - 2)
        frac = c - i0
        u0, u1 = xs_u[i0], xs_u[i0 + 1]
        guess = u0 + frac * (u1 - u0)
        f0 = data[j, i0]
        y = float(grid.y[j])

        def fn(u):
            x = float(grid.x_axis.from_internal(u))
            return _field_value(grid.engine.evaluate(*grid.params_at(x, y))[1], field_name)

        u = _bisect_edge(fn, u0, u1, f0 - level, level, guess) if refine else guess
        return float(grid.x_axis.from_internal(u)), y
    i = int(round(c))
    j0 = min(rf, len(ys_u) - 2)
    frac = r - j0
    u0, u1 = ys_u[j0], ys_u[j0 + 1]
    guess = u0 + frac * (u1 - u0)
    f0 = data[j0, i]
    x = float(grid.x[i])

    def fn(u):
        yv = float(grid.y_axis.from_internal(u))
        return _field_value(grid.engine.evaluate(*grid.params_at(x, yv))[1], field_name)

    u = _bisect_edge(fn, u0, u1, f0 - level, level, guess) if refine else guess
    return x, float(grid.y_axis.from_internal(u))


def contours_to_json(lines: list[ContourLine], field_name: str) -> str:
    return json.dumps({"field": field_name, "lines": [ln.as_dict() for ln in lines]}, sort_keys=True)


def bilinear(grid: SweepGrid, field_name: str, x: float, y: float) -> float:
    """Bilinear interpolation of a grid field in the axes' own scales."""
    data = grid.field(field_name)
    xu, yu = grid.x_axis.to_internal(grid.x), grid.y_axis.to_internal(grid.y)
    px, py = grid.x_axis.to_internal(x), grid.y_axis.to_internal(y)
    i = int(np.clip(np.searchsorted(xu, px) - 1, 0, len(xu) - 2))
    j = int(np.clip(np.searchsorted(yu, py) - 1, 0, len(yu) - 2))
    tx = (px - xu[i]) / (xu[i + 1] - xu[i])
    ty = (py - yu[j]) / (yu[j + 1] - yu[j])
    return float((1 - tx) * (1 - ty) * data[j, i] + tx * (1 - ty) * data[j, i + 1]
                 + (1 - tx) * ty * data[j + 1, i] + tx * ty * data[j + 1, i + 1])


# -- inverse design ---------------------------------------------------------


def _fid(engine: Engine, params: SystemParams) -> float:
    return engine.evaluate(params)[1].fidelity_or(math.nan)


def threshold_kappa(params: SystemParams, target_f: float, engine: Engine = LONG_PULSE,
                    kappa_range: tuple[float, float] = (1e-3, 1e2)) -> float:
    """Largest cavity decay rate that still reaches fidelity ``target_f``.

    ``params.kappa`` is ignored. A 16-point log pre-scan checks that F falls
    with kappa; if it does not, a dense scan picks the last crossing.
    """
    lo, hi = kappa_range

    def f(k):
        return _fid(engine, params.replace(kappa=k))

    ks = np.geomspace(lo, hi, 16)
    fs = np.array([f(k) for k in ks])
    ok = np.isfinite(fs)
    monotone = bool(np.all(np.diff(fs[ok]) <= 1e-12))
    if not monotone:
        log.info("F(kappa) not monotone on pre-scan; falling back to dense scan")
        ks = np.geomspace(lo, hi, 400)
        fs = np.array([f(k) for k in ks])
        ok = np.isfinite(fs)
    above = np.where(ok, fs >= target_f, False)
    cross = [n for n in range(len(ks) - 1) if above[n] and ok[n + 1] and not above[n + 1]]
    if not cross:
        raise BracketError(f"F - {target_f} has no sign change for kappa in [{lo:g}, {hi:g}]",
                           [(float(k), float(v)) for k, v in zip(ks, fs)])
    n = cross[-1]
    a, b = math.log(ks[n]), math.log(ks[n + 1])
    while math.exp(b) - math.exp(a) > SEARCH_TOL / 10:
        m = 0.5 * (a + b)
        if f(math.exp(m)) >= target_f:
            a = m
        else:
            b = m
    return math.exp(a)


@dataclass(frozen=True)
class DetuningOptimum:
    delta: float
    fidelity: float
    probability: float

    def as_dict(self) -> dict:
        return {"delta": self.delta, "fidelity": self.fidelity, "probability": self.probability}


_GOLDEN = (math.sqrt(5) - 1) / 2


def optimal_detuning(params: SystemParams, min_p: float, engine: Engine = LONG_PULSE,
                     delta_max: float = 50.0, n_scan: int = 201) -> DetuningOptimum:
    """Maximise F over delta >= 0 subject to P >= ``min_p``.

    Coarse scan, then golden-section search on the penalised objective in
    the bracket around the best feasible scan point. Ties in F go to the
    larger P.
    """
    if not 0 < min_p <= 0.125:
        if min_p > 0.125:
            raise InfeasibleError(f"min_P={min_p} exceeds the 1/8 ceiling", 0.125)
        raise PreconditionError("min_P must be positive")

    cache: dict = {}

    def ev(d):
        if d not in cache:
            figs = engine.evaluate(params.replace(delta=float(d)))[1]
            cache[d] = (figs.fidelity_or(math.nan), figs.probability)
        return cache[d]

    ds = np.linspace(0.0, delta_max, n_scan)
    vals = [ev(d) for d in ds]
    feasible = [(k, f, p) for k, (f, p) in enumerate(vals) if p >= min_p and math.isfinite(f)]
    if not feasible:
        raise InfeasibleError(f"no detuning in [0, {delta_max:g}] gives P >= {min_p:g}",
                              max(p for _, p in vals))
    k_best, f_best, p_best = max(feasible, key=lambda t: (round(t[1], 12), t[2]))

    def objective(d):
        f, p = ev(d)
        if not math.isfinite(f):
            return -math.inf
        return f if p >= min_p else f - 1.0 - (min_p - p)

    a = ds[max(k_best - 1, 0)]
    b = ds[min(k_best + 1, n_scan - 1)]
    flat = all(abs(ev(d)[0] - f_best) < 1e-12 for d in (a, b))
    if not flat:
        c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
        fc, fd = objective(c), objective(d)
        while b - a > SEARCH_TOL:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = objective(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = objective(d)
    best = max(((d, f, p) for d, (f, p) in cache.items() if p >= min_p and math.isfinite(f)),
               key=lambda t: (round(t[1], 12), t[2]))
    return DetuningOptimum(float(best[0]), float(best[1]), float(best[2]))
