"""Command-line interface: ``cavity-eo <command> [flags]``.

Exit codes: 0 ok, 1 verification failure, 2 usage, 3 physics domain, 4 I/O.
JSON records go to stdout, one line each; percentages appear only in log
lines on stderr.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, circuit, manifest, pulsed, response, sweep, verify
from .errors import CavityEOError, ValidationError
from .model import SystemParams, Units, normalize
from .response import EoFigures

log = logging.getLogger("cavity_eo")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_PHYSICS, EXIT_IO = 0, 1, 2, 3, 4

PARAM_FLAGS = ("kappa", "gamma", "gamma_p", "delta", "g", "delta_p")


class UsageError(Exception):
    pass


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# -- argument plumbing ------------------------------------------------------


def _add_params(p: argparse.ArgumentParser, pulse: bool = True) -> None:
    grp = p.add_argument_group("system parameters")
    grp.add_argument("--kappa", type=float, help="cavity decay rate")
    grp.add_argument("--gamma", type=float, help="spontaneous emission rate")
    grp.add_argument("--gamma-p", dest="gamma_p", type=float, help="pure dephasing rate")
    grp.add_argument("--delta", type=float, help="qubit-cavity detuning")
    grp.add_argument("--g", type=float, default=1.0, help="coupling (default 1)")
    grp.add_argument("--delta-p", dest="delta_p", type=float, default=0.0,
                     help="photon-cavity detuning (default 0)")
    grp.add_argument("--units", default="units-of-g",
                     help="units-of-g | angular-frequency | mhz-over-2pi")
    if pulse:
        grp.add_argument("--pulse-length", dest="pulse_length", type=float, default=None,
                         help="finite input pulse length; omit for the long-pulse limit")


def _params(args, skip=()) -> SystemParams:
    values = {}
    missing = []
    for name in PARAM_FLAGS:
        if name in skip:
            continue
        v = getattr(args, name, None)
        if v is None:
            missing.append("--" + name.replace("_", "-"))
        values[name] = v
    if missing:
        raise UsageError("missing required flags: " + " ".join(missing))
    for name in skip:
        values[name] = 0.0 if name != "g" else 1.0
    return normalize(SystemParams(units=Units.parse(args.units), **values))


def _engine(args) -> sweep.Engine:
    """Pulse lengths are always in units of 1/g."""
    l = getattr(args, "pulse_length", None)
    if l is None:
        return sweep.LONG_PULSE
    return sweep.Engine.finite(l)


def _axis(text: str) -> sweep.Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise UsageError(f"axis must be name:min:max:count[:scale], got {text!r}")
    name = parts[0].replace("-", "_")
    try:
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise UsageError(f"bad numbers in axis {text!r}") from None
    return sweep.Axis(name, lo, hi, n, parts[4] if len(parts) == 5 else "linear")


def _scaled_axis(ax: sweep.Axis, factor: float) -> sweep.Axis:
    if ax.name == "l" or factor == 1.0:
        return ax
    return sweep.Axis(ax.name, ax.min * factor, ax.max * factor, ax.count, ax.scale)


def _figures_record(figs: EoFigures) -> dict:
    return figs.as_dict()


# -- commands ---------------------------------------------------------------


def cmd_eval(args) -> int:
    params = _params(args)
    engine = _engine(args)
    if engine.kind == "long-pulse":
        t, figs = response.evaluate(params)
        rec = {"t_e": [t.t_e.real, t.t_e.imag], "t_i_sq": t.t_i_sq}
    else:
        nb = pulsed.norm_bundle(params, engine.l)
        figs = response.figures_from_norms(nb.n_elastic_diff, nb.n_inelastic_sum)
        rec = {"t_e": None, "t_i_sq": nb.n_inelastic_sum, "elastic_difference_norm": nb.n_elastic_diff}
    rec.update(_figures_record(figs))
    rec["engine"] = engine.label()
    _emit(rec)
    if figs.defined:
        log.info("F = %.4f, P = %.4f%%", figs.fidelity, 100 * figs.probability)
    return EXIT_OK


def _grid_from_args(args):
    xa, ya = _axis(args.x), _axis(args.y)
    params = _params(args, skip=tuple(a.name for a in (xa, ya) if a.name in PARAM_FLAGS))
    # axis values share the flags' units; after normalisation only 1/g survives
    # (the 2*pi of mhz-over-2pi cancels in every ratio)
    f = 1.0 / args.g
    return sweep.grid_sweep(_scaled_axis(xa, f), _scaled_axis(ya, f), params, _engine(args))


def _finish(args, command: str, outputs: list[Path], started, engine=None, seed=None) -> None:
    arguments = {k: v for k, v in vars(args).items() if k not in ("func", "config", "command")}
    man = manifest.build(command, arguments, engine, seed, outputs, started)
    target = Path(args.manifest) if getattr(args, "manifest", None) else outputs[0].parent / "manifest.json"
    manifest.write(target, man)
    log.info("wrote %s", ", ".join(str(p) for p in outputs + [target]))


def cmd_sweep(args) -> int:
    started = _dt.datetime.now(_dt.timezone.utc)
    grid = _grid_from_args(args)
    out = _write_text(Path(args.out), grid.to_csv())
    _finish(args, "sweep", [out], started, grid.engine.as_dict())
    _emit({"csv": str(out), "cells": int(grid.fidelity.size), "errors": len(grid.errors)})
    return EXIT_OK


def cmd_contour(args) -> int:
    started = _dt.datetime.now(_dt.timezone.utc)
    grid = _grid_from_args(args)
    levels = args.level or [0.9, 0.95]
    payload = {"field": args.field, "levels": {}}
    for lev in levels:
        lines = sweep.contour(grid, args.field, lev)
        payload["levels"][repr(float(lev))] = [ln.as_dict() for ln in lines]
    out = _write_text(Path(args.out), json.dumps(payload, sort_keys=True) + "\n")
    outputs = [out]
    if args.csv:
        outputs.append(_write_text(Path(args.csv), grid.to_csv()))
    _finish(args, "contour", outputs, started, grid.engine.as_dict())
    _emit({"json": str(out), "lines": {k: len(v) for k, v in payload["levels"].items()}})
    return EXIT_OK


def _pulse_rows(params: SystemParams, lengths, label: float) -> list[str]:
    rows = []
    for l, figs in sweep.pulse_scan(params, lengths):
        f = repr(float(figs.fidelity)) if figs.defined else "undefined"
        rows.append(f"{label!r},{l!r},{f},{figs.probability!r}")
    return rows


def cmd_pulse_scan(args) -> int:
    started = _dt.datetime.now(_dt.timezone.utc)
    params = _params(args)
    lengths = np.geomspace(args.l_min, args.l_max, args.count)
    rows = ["kappa,l,F,P"] + _pulse_rows(params, lengths, params.kappa)
    out = _write_text(Path(args.out), "\n".join(rows) + "\n")
    _finish(args, "pulse-scan", [out], started)
    _emit({"csv": str(out), "points": len(lengths)})
    return EXIT_OK


FIG3 = dict(x=sweep.Axis("kappa", 0.1, 10, 200, "log"), y=sweep.Axis("delta", 0, 15, 200),
            fixed=SystemParams(kappa=1, gamma=2, gamma_p=2, delta=0))
FIGA3 = dict(x=sweep.Axis("kappa", 0.01, 10, 200, "log"), y=sweep.Axis("gamma", 0, 5, 201),
             fixed=SystemParams(kappa=1, gamma=0, gamma_p=2, delta=0))
FIGA2_KAPPAS = (0.5, 1.0, 2.0, 4.0)
FIGA2_LENGTHS = np.geomspace(1e-3, 1e3, 25)
FIGA2_P_SET = dict(gamma=0.0, gamma_p=0.0, delta=0.0)
FIGA2_F_SET = dict(gamma=2.0, gamma_p=2.0, delta=0.0)
CONTOUR_LEVELS = (0.9, 0.95)


def reproduce(figure: str, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure in ("fig3", "figA3"):
        layout = FIG3 if figure == "fig3" else FIGA3
        grid = sweep.grid_sweep(layout["x"], layout["y"], layout["fixed"])
        csv_path = _write_text(out_dir / f"{figure}_grid.csv", grid.to_csv())
        payload = {"field": "F", "levels": {}}
        for lev in CONTOUR_LEVELS:
            payload["levels"][repr(lev)] = [ln.as_dict() for ln in sweep.contour(grid, "F", lev)]
        js = _write_text(out_dir / f"{figure}_contours.json", json.dumps(payload, sort_keys=True) + "\n")
        return [csv_path, js]
    if figure == "figA2":
        outputs = []
        for name, fixed in (("probability", FIGA2_P_SET), ("fidelity", FIGA2_F_SET)):
            rows = ["kappa,l,F,P"]
            for k in FIGA2_KAPPAS:
                rows += _pulse_rows(SystemParams(kappa=k, **fixed), FIGA2_LENGTHS, k)
            outputs.append(_write_text(out_dir / f"figA2_{name}.csv", "\n".join(rows) + "\n"))
        return outputs
    raise UsageError(f"unknown figure {figure!r}")


def cmd_reproduce(args) -> int:
    started = _dt.datetime.now(_dt.timezone.utc)
    outputs = reproduce(args.figure, Path(args.out_dir))
    _finish(args, "reproduce", outputs, started, sweep.LONG_PULSE.as_dict()
            if args.figure != "figA2" else {"kind": "finite-pulse", "l": "scanned"})
    _emit({"figure": args.figure, "outputs": [str(p) for p in outputs]})
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    checks = verify.run_checks(seed=args.seed, n_draws=args.draws, tol_override=args.tol)
    rep = verify.report(checks, args.seed, args.draws)
    _emit(rep)
    for c in checks:
        if not c.passed:
            log.warning("check %s failed: residual %.3e > %.1e", c.name, c.residual, c.tolerance)
    return EXIT_OK if rep["passed"] else EXIT_CHECK


def cmd_sample(args) -> int:
    if args.force_p is not None:
        figs = EoFigures(1.0 if args.force_f is None else args.force_f, args.force_p)
    else:
        params = _params(args)
        engine = _engine(args)
        figs = engine.evaluate(params)[1]
        if args.force_f is not None:
            figs = EoFigures(args.force_f, figs.probability)
    stats = circuit.sample_eo_runs(figs, args.trials, args.seed)
    _emit(stats.as_dict())
    return EXIT_OK


def cmd_threshold_kappa(args) -> int:
    if args.kappa is None:
        args.kappa = 1.0
    params = _params(args)
    k = sweep.threshold_kappa(params, args.target, _engine(args))
    _emit({"kappa": k, "target_fidelity": args.target, "units": "g"})
    return EXIT_OK


def cmd_optimal_delta(args) -> int:
    if args.delta is None:
        args.delta = 0.0
    params = _params(args)
    opt = sweep.optimal_detuning(params, args.min_p, _engine(args), delta_max=args.delta_max)
    _emit(opt.as_dict())
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-eo",
        description="Fidelity and success probability of cavity-mediated heralded entanglement.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--config", default=None, help="JSON file of flag values (or a run manifest)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate F and P at one point")
    _add_params(p)
    p.set_defaults(func=cmd_eval)

    for name, func, help_ in (("sweep", cmd_sweep, "grid sweep to CSV"),
                              ("contour", cmd_contour, "iso-lines of F or P to JSON")):
        p = sub.add_parser(name, help=help_)
        _add_params(p)
        p.add_argument("--x", default="kappa:0.1:10:200:log", help="name:min:max:count[:scale]")
        p.add_argument("--y", default="delta:0:15:200:linear", help="name:min:max:count[:scale]")
        p.add_argument("--out", default=None)
        p.add_argument("--manifest", default=None)
        if name == "contour":
            p.add_argument("--field", choices=["F", "P"], default="F")
            p.add_argument("--level", type=float, action="append")
            p.add_argument("--csv", default=None, help="also write the grid CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("pulse-scan", help="F and P versus pulse length")
    _add_params(p, pulse=False)
    p.add_argument("--l-min", dest="l_min", type=float, default=1e-3)
    p.add_argument("--l-max", dest="l_max", type=float, default=1e3)
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_pulse_scan)

    p = sub.add_parser("reproduce", help="regenerate figure data")
    p.add_argument("--figure", choices=["fig3", "figA2", "figA3"], default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("oracle-check", help="cross-validate analytic and brute-force paths")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=10)
    p.add_argument("--tol", type=float, default=None, help="override every tolerance")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("sample", help="Monte Carlo repeat-until-success runs")
    _add_params(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-p", dest="force_p", type=float, default=None)
    p.add_argument("--force-f", dest="force_f", type=float, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("threshold-kappa", help="largest kappa reaching a target fidelity")
    _add_params(p)
    p.add_argument("--target", type=float, default=0.9)
    p.set_defaults(func=cmd_threshold_kappa)

    p = sub.add_parser("optimal-delta", help="best detuning under a success-probability floor")
    _add_params(p)
    p.add_argument("--min-p", dest="min_p", type=float, required=False, default=None)
    p.add_argument("--delta-max", dest="delta_max", type=float, default=50.0)
    p.set_defaults(func=cmd_optimal_delta)
    return parser


_REQUIRED = {
    "sweep": ("out",),
    "contour": ("out",),
    "pulse-scan": ("out",),
    "reproduce": ("figure", "out_dir"),
    "optimal-delta": ("min_p",),
}


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = manifest.load_arguments(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        config = {k.replace("-", "_"): v for k, v in config.items()}
        # re-parse with config values as defaults so explicit flags win
        for action in parser._subparsers._group_actions:
            sp = action.choices[args.command]
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config.items() if k in known})
        args = parser.parse_args(argv)
    for name in _REQUIRED.get(args.command, ()):
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"cavity-eo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cavity-eo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        _emit(exc.to_dict())
        return EXIT_USAGE
    except CavityEOError as exc:
        _emit(exc.to_dict())
        return EXIT_PHYSICS
    except OSError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
