"""Command-line front end: ``stirmix {poincare,freqmap,scan,naff,action}``.

Every command writes a CSV, a ``.meta.json`` sidecar with the full
configuration, and (for plottable outputs) a matplotlib script.
Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .averaged import (
    action,
    action_derivatives,
    averaged_frequency,
    energy_bounds,
    twist_quantities,
)
from .errors import ConfigError, NumericalError, OutOfRange, StirmixError, ZeroTwist
from .io import (
    FREQMAP_PLOT,
    POINCARE_PLOT,
    SCAN_PLOT,
    read_key_value,
    read_signal_csv,
    sidecar_paths,
    write_csv,
    write_metadata,
    write_plot_script,
)
from .mixing import PRESETS, efficiency_scan, frequency_map_scan
from .naff import MIN_SAMPLES, Signal, decompose
from .vortex_core import TankConfig, iterate_orbits

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

POINCARE_ORBITS = 18
POINCARE_ITER = 10000
SCAN_B = (0.3, 0.5, 0.7)
SCAN_T = (0.05, 0.5, 1.5)
SCAN_B_TEXT = ",".join(str(x) for x in SCAN_B)
SCAN_T_TEXT = ",".join(str(x) for x in SCAN_T)
GAMMA_NOTE = "gamma is the circulation of the agitator vortex (default 2 pi); counterclockwise for gamma > 0"


@dataclass
class RunConfig:
    command: str
    tank: TankConfig
    preset: str
    out: str
    params: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "command": self.command,
            "tank": asdict(self.tank),
            "preset": self.preset,
            "out": self.out,
            "params": self.params,
        }


def _float_list(text, name):
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise ConfigError(name, f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(name, "empty list")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(name, "values must be finite")
    return vals


def _positive_int(value, name, allow_zero=False):
    if value is None or (value < 0 if allow_zero else value < 1):
        raise ConfigError(name, f"must be {'>= 0' if allow_zero else '>= 1'}, got {value}")
    return int(value)


def _single(args, name):
    vals = _float_list(getattr(args, name), name)
    if len(vals) != 1:
        raise ConfigError(name, "this command takes a single value")
    return vals[0]


def _tank(args, b=None, T=None):
    return TankConfig(
        R=args.R,
        gamma=args.gamma,
        b=_single(args, "b") if b is None else b,
        T=_single(args, "T") if T is None else T,
    )


def _window_params(args, preset, n_iter):
    k1 = preset.k1 if args.k1 is None else args.k1
    stride = preset.stride if args.stride is None else args.stride
    if args.n_iter is not None and args.k1 is None:
        k1 = n_iter // 2
        stride = max(k1 // 16, 1) if args.stride is None else stride
    _positive_int(k1, "k1")
    _positive_int(stride, "stride")
    if k1 + 1 < MIN_SAMPLES:
        raise ConfigError("k1", f"window needs at least {MIN_SAMPLES} samples")
    if k1 >= n_iter:
        raise ConfigError("k1", f"must be smaller than n_iter={n_iter}")
    if args.p < 0:
        raise ConfigError("p", "must be >= 0")
    return k1, stride


def build_config(args) -> RunConfig:
    """Validate everything before computation; errors name the field."""
    if args.preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {args.preset!r}")
    preset = PRESETS[args.preset]
    if args.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    cmd = args.command
    out = args.out or f"{cmd}.csv"
    params = {}
    if cmd == "poincare":
        tank = _tank(args)
        n_iter = POINCARE_ITER if args.n_iter is None else args.n_iter
        params["n_iter"] = _positive_int(n_iter, "n_iter", allow_zero=True)
        params["n_orbits"] = _positive_int(args.n_orbits, "n_orbits")
    elif cmd == "freqmap":
        tank = _tank(args)
        n_iter = _positive_int(preset.n_iter if args.n_iter is None else args.n_iter, "n_iter")
        k1, stride = _window_params(args, preset, n_iter)
        n_points = _positive_int(
            preset.n_points if args.n_points is None else args.n_points, "n_points")
        y_hi = tank.R if args.y_hi is None else args.y_hi
        if not 0 <= args.y_lo < y_hi <= tank.R:
            raise ConfigError("y_range", f"need 0 <= y_lo < y_hi <= R, got [{args.y_lo}, {y_hi}]")
        params.update(n_iter=n_iter, k1=k1, stride=stride, p=args.p, n_points=n_points,
                      y_lo=args.y_lo, y_hi=y_hi, eps_thr=args.eps_thr, workers=args.workers)
    elif cmd == "scan":
        b_vals = _float_list(args.b if args.b is not None else SCAN_B_TEXT, "b")
        T_vals = _float_list(args.T if args.T is not None else SCAN_T_TEXT, "T")
        for b in b_vals:
            for T in T_vals:
                TankConfig(R=args.R, gamma=args.gamma, b=b, T=T)
        tank = TankConfig(R=args.R, gamma=args.gamma, b=b_vals[0], T=T_vals[0])
        n_iter = _positive_int(preset.n_iter if args.n_iter is None else args.n_iter, "n_iter")
        k1, stride = _window_params(args, preset, n_iter)
        grid = preset.grid_spacing if args.grid is None else args.grid
        if not 0 < grid < args.R:
            raise ConfigError("grid", f"must satisfy 0 < grid < R, got {grid}")
        params.update(b_values=b_vals, T_values=T_vals, n_iter=n_iter, k1=k1, stride=stride,
                      p=args.p, grid_spacing=grid, eps_thr=args.eps_thr, workers=args.workers)
    elif cmd == "naff":
        tank = TankConfig(R=args.R, gamma=args.gamma)
        if not args.input:
            raise ConfigError("input", "an input file is required")
        if not args.dt > 0:
            raise ConfigError("dt", "must be > 0")
        if args.p < 0:
            raise ConfigError("p", "must be >= 0")
        params.update(input=args.input, p=args.p, n_terms=_positive_int(args.n_terms, "n_terms"),
                      dt=args.dt)
    elif cmd == "action":
        tank = _tank(args, T=0.0)
        if args.E is None:
            lo, hi = energy_bounds(tank)
            E = list(lo + (hi - lo) * np.arange(1, 11) / 10)
        else:
            E = _float_list(args.E, "E")
        params["E"] = [float(x) for x in E]
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError("command", cmd)
    return RunConfig(cmd, tank, preset.name, out, params)


def _meta(rc: RunConfig, extra=None):
    meta = rc.as_dict()
    meta["gamma_convention"] = GAMMA_NOTE
    meta["version"] = __version__
    meta["columns_precision"] = "17 significant digits"
    if extra:
        meta.update(extra)
    return meta


def _finish(rc, header, rows, template=None, extra_meta=None, **plot_fields):
    out = write_csv(rc.out, header, rows)
    meta_path, plot_path = sidecar_paths(out)
    write_metadata(meta_path, _meta(rc, extra_meta))
    if template is not None:
        write_plot_script(plot_path, template, out, **plot_fields)
    return out


def poincare_initial_points(tank: TankConfig, n: int):
    """``i j R/(n+1)`` for ``j = 1..n``: equally spaced on the upper radius."""
    return 1j * tank.R * np.arange(1, n + 1) / (n + 1)


def cmd_poincare(rc: RunConfig):
    tank = rc.tank
    z0 = poincare_initial_points(tank, rc.params["n_orbits"])
    orbits, failed_at = iterate_orbits(z0, tank, rc.params["n_iter"])
    bad = np.flatnonzero(failed_at >= 0)
    if bad.size:
        j = int(bad[0])
        raise NumericalError(f"orbit {j} reached a vortex at iterate {int(failed_at[j])}")
    n = orbits.shape[0]
    rows = (
        (j, k, orbits[k, j].real, orbits[k, j].imag)
        for j in range(z0.size) for k in range(n)
    )
    title = f"b={tank.b:g}, T={tank.T:g}"
    return _finish(rc, ("orbit_id", "k", "x", "y"), rows, POINCARE_PLOT, R=tank.R, title=title)


def cmd_freqmap(rc: RunConfig):
    p = rc.params
    res = frequency_map_scan(rc.tank, n_points=p["n_points"], y_range=(p["y_lo"], p["y_hi"]),
                             n_iter=p["n_iter"], p=p["p"], k1=p["k1"], stride=p["stride"],
                             workers=p["workers"])
    rows = ((r.zeta0.imag, r.nu, r.eps, r.flag) for r in res)
    title = f"b={rc.tank.b:g}, T={rc.tank.T:g}"
    return _finish(rc, ("y0", "nu", "eps", "flag"), rows, FREQMAP_PLOT,
                   eps_thr=p["eps_thr"], title=title)


def grid_path(out, b, T):
    out = Path(out)
    return out.with_name(f"{out.stem}_grid_b{b:g}_T{T:g}.csv")


def cmd_scan(rc: RunConfig):
    p = rc.params
    reports, grids = efficiency_scan(
        p["b_values"], p["T_values"], rc.tank, p["grid_spacing"], p["n_iter"], p["k1"],
        p["stride"], p["eps_thr"], p["p"], p["workers"], keep_grids=True)
    grid_files = []
    for rep, grid in zip(reports, grids):
        path = grid_path(rc.out, rep.b, rep.T)
        write_csv(path, ("x0", "y0", "nu", "eps", "flag"),
                  ((z.real, z.imag, nu, eps, fl)
                   for z, nu, eps, fl in zip(grid.zeta0, grid.nu, grid.eps, grid.flag)))
        grid_files.append(path.name)
    rows = ((r.b, r.T, r.m, r.label) for r in reports)
    return _finish(rc, ("b", "T", "m", "label"), rows, SCAN_PLOT,
                   extra_meta={"grid_files": grid_files},
                   title=f"eps_thr={p['eps_thr']:g}, grid={p['grid_spacing']:g}")


def cmd_naff(rc: RunConfig):
    p = rc.params
    try:
        samples = read_signal_csv(p["input"])
    except OSError as exc:
        raise ConfigError("input", str(exc)) from None
    if samples.size < MIN_SAMPLES:
        raise ConfigError("input", f"{samples.size} samples; at least {MIN_SAMPLES} required")
    terms = decompose(Signal(samples, dt=p["dt"]), p["n_terms"], p["p"])
    rows = ((t.freq, t.amp.real, t.amp.imag, abs(t.amp)) for t in terms)
    return _finish(rc, ("freq", "amp_re", "amp_im", "amp_abs"), rows)


def action_row(E, tank):
    """``(E, lnE, I, dI, d2I, twist1, twist2, frequency, flag)``; failures are flagged."""
    nan = math.nan
    lnE = math.log(E) if E > 0 else nan
    try:
        I = action(E, tank).I
    except OutOfRange:
        return (E, lnE, nan, nan, nan, nan, nan, nan, "out_of_range")
    try:
        d1, d2 = action_derivatives(E, tank)
        q1, q2 = twist_quantities(E, tank)
    except NumericalError:
        return (E, lnE, I, nan, nan, nan, nan, nan, "no_convergence")
    try:
        freq = averaged_frequency(E, tank)
    except ZeroTwist:
        return (E, lnE, I, d1, d2, q1, q2, nan, "zero_twist")
    return (E, lnE, I, d1, d2, q1, q2, freq, "")


def cmd_action(rc: RunConfig):
    rows = [action_row(E, rc.tank) for E in rc.params["E"]]
    header = ("E", "lnE", "I", "dI", "d2I", "twist1", "twist2", "frequency", "flag")
    return _finish(rc, header, rows)


COMMANDS = {
    "poincare": cmd_poincare,
    "freqmap": cmd_freqmap,
    "scan": cmd_scan,
    "naff": cmd_naff,
    "action": cmd_action,
}


def _common(p):
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--b", default=None,
                   help="vortex offset (comma list for scan)")
    p.add_argument("--T", default=None, help="stirring period (comma list for scan)")
    p.add_argument("--R", type=float, default=1.0, help="tank radius")
    p.add_argument("--gamma", type=float, default=2 * math.pi, help="circulation")
    p.add_argument("--preset", default="desk", choices=sorted(PRESETS))
    p.add_argument("--n-iter", type=int, default=None)
    p.add_argument("--k1", type=int, default=None, help="NAFF window length (periods)")
    p.add_argument("--stride", type=int, default=None, help="window offset (periods)")
    p.add_argument("--p", type=int, default=1, help="Hanning order")
    p.add_argument("--eps-thr", type=float, default=12.0)
    p.add_argument("--grid", type=float, default=None, help="grid spacing for scan")
    p.add_argument("--out", default=None, help="output CSV (overwritten)")
    p.add_argument("--workers", type=int, default=1)


def make_parser():
    parser = argparse.ArgumentParser(prog="stirmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("poincare", help="Poincare section of equally spaced initial points")
    _common(p)
    p.add_argument("--n-orbits", type=int, default=POINCARE_ORBITS)
    p = sub.add_parser("freqmap", help="NAFF frequency map along the upper radius")
    _common(p)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--y-lo", type=float, default=0.0)
    p.add_argument("--y-hi", type=float, default=None)
    p = sub.add_parser("scan", help="robust fraction over a (b, T) grid")
    _common(p)
    p = sub.add_parser("naff", help="NAFF decomposition of a two-column CSV signal")
    _common(p)
    p.add_argument("--input", default=None)
    p.add_argument("--n-terms", type=int, default=5)
    p.add_argument("--dt", type=float, default=1.0)
    p = sub.add_parser("action", help="action, derivatives and twist at energy levels")
    _common(p)
    p.add_argument("--E", default=None, help="comma-separated energy levels")
    for name in ("poincare", "freqmap", "action"):
        sub.choices[name].set_defaults(b="0.5", T="0.05")
    return parser


def _expand_config(argv):
    """Insert the key=value file's settings before the command-line flags."""
    argv = list(argv)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            del argv[i:i + 2]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            del argv[i]
            break
    if path is None or not argv:
        return argv
    try:
        pairs = read_key_value(path)
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None
    extra = []
    for key, value in pairs.items():
        extra += [f"--{key}", value]
    return argv[:1] + extra + argv[1:]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = make_parser().parse_args(_expand_config(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rc = build_config(args)
        COMMANDS[rc.command](rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StirmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
