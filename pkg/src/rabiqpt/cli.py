"""Command-line front end.

Every frequency is entered in units of omega0; to use absolute units divide
by omega0 first. Exit status: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import DomainError, InvalidSweepSpec, RabiQPTError, UnknownPreset
from .fock import FockSpace, Integrator, ed_observables, fidelity_trace, ground_state_ed
from .model import SystemParams, a2_amplitude, rwa_validity
from .phases import phase_point, reduced_couplings
from .sweep import (DEFAULTS, PARAMETERS, PRESETS, Axis, SweepSpec, build_point, export_table,
                    figure_preset, load_config, load_parameters, run_sweep, to_csv, to_json)

CONFIG_GRAMMAR = """config grammar (INI style, '#' comments):
  [sweep]       engine = analytic|ed|dynamics, selection = min_detuning|max_ratio|manual,
                preset = <name> (optional base), name = <label>
  [axes]        <param> = min, max, count    or    <param> = [v1, v2, ...]
  [fixed]       <param> = <value>
  [quantities]  one quantity name per line"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}{CONFIG_GRAMMAR}")


def _add_physics(p, lam_mu=True):
    g = p.add_argument_group("model parameters (frequencies in units of omega0)")
    g.add_argument("--eta", type=float, help="bare ratio omega0/omega_c [dimensionless]")
    g.add_argument("--g", type=float, help="bare coupling g [omega0]")
    g.add_argument("--chi", type=float, help="A^2 prefactor chi [dimensionless]")
    g.add_argument("--kappa", type=float, help="cavity loss rate kappa [omega0]")
    g.add_argument("--xi", type=float, help="modulation amplitude xi [dimensionless]")
    g.add_argument("--nu", type=float, help="modulation frequency nu [omega0]")
    g.add_argument("--n0", type=int, help="manual rotating sideband index [integer]")
    g.add_argument("--m0", type=int, help="manual counter-rotating sideband index [integer]")
    g.add_argument("--selection", choices=["min_detuning", "max_ratio", "manual"],
                   help="sideband selection rule (default min_detuning)")
    if lam_mu:
        g.add_argument("--lambda", dest="lam", type=float,
                       help="rotating coupling g_r/g_C [dimensionless]")
        g.add_argument("--mu", type=float,
                       help="counter-rotating coupling g_cr/g_C [dimensionless]")
        g.add_argument("--eta-eff", type=float,
                       help="effective ratio omega0_eff/omega_c_eff; builds the effective "
                            "model directly from --lambda/--mu [dimensionless]")


def _add_common(p):
    p.add_argument("--config", help="key=value config file (see grammar below)")
    p.add_argument("--out", help="output path [default stdout]")
    p.add_argument("--format", choices=["text", "json", "csv"], default=None,
                   help="output format (default text; csv for sweeps)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics")


def build_parser():
    parser = _Parser(prog="rabiqpt", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     epilog=CONFIG_GRAMMAR)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, description=help_, epilog=CONFIG_GRAMMAR,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        return p

    p = cmd("effective", "effective anisotropic model and RWA validity report")
    _add_physics(p, lam_mu=False)
    p.add_argument("--threshold", type=float, help="RWA smallness threshold [dimensionless]")

    p = cmd("phase", "analytic phase-point result at (lambda, mu) or at (xi, nu)")
    _add_physics(p)

    p = cmd("sweep", "run a sweep from --config or --preset")
    _add_physics(p)
    p.add_argument("--preset", help=f"figure preset: {', '.join(PRESETS)}")
    p.add_argument("--jobs", type=int, help="worker processes [default $RABIQPT_JOBS or 1]")

    p = cmd("ed", "exact diagonalisation of the effective model")
    _add_physics(p)
    p.add_argument("--n-max", type=int, help="Fock cutoff n_max [photons]")
    p.add_argument("--bias", type=float, help="symmetry-breaking field on (a+a^dag) [omega0]")
    p.add_argument("--k", type=int, help="number of eigenpairs [count]")

    p = cmd("fidelity", "overlap of full and two-sideband evolution from |e>|alpha>")
    _add_physics(p, lam_mu=False)
    p.add_argument("--alpha", type=float, help="coherent amplitude alpha [dimensionless]")
    p.add_argument("--n-max", type=int, help="Fock cutoff n_max [photons] (default 24)")
    p.add_argument("--t-max", type=float, default=10.0,
                   help="final time omega0 t / 2 pi [periods of omega0]")
    p.add_argument("--points", type=int, default=101, help="number of output times [count]")
    p.add_argument("--method", choices=["rk4", "adaptive"], default="rk4",
                   help="integrator (fixed-step RK4 or adaptive DOP853)")
    p.add_argument("--dt", type=float, help="RK4 step [1/omega0]")

    p = cmd("a2", "A^2 audit table g_a2/(2 omega_c') over g and chi")
    p.add_argument("--eta", type=float, help="bare ratio omega0/omega_c [dimensionless]")
    p.add_argument("--g", type=_floats, help="comma list of couplings [omega0]")
    p.add_argument("--chi", type=_floats, help="comma list of chi values [dimensionless]")

    p = cmd("boundary", "g~_C and g_C^diss along one axis")
    _add_physics(p, lam_mu=False)
    p.add_argument("--axis", default="xi", help="swept parameter name (default xi)")
    p.add_argument("--min", type=float, default=0.0, help="axis start [parameter units]")
    p.add_argument("--max", type=float, default=12.0, help="axis end [parameter units]")
    p.add_argument("--count", type=int, default=300, help="axis points [count]")
    p.add_argument("--jobs", type=int, help="worker processes [default $RABIQPT_JOBS or 1]")
    return parser


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


_FLAG_TO_PARAM = {"eta": "eta", "g": "g", "chi": "chi", "kappa": "kappa", "xi": "xi",
                  "nu": "nu", "n0": "n0", "m0": "m0", "lam": "lambda", "mu": "mu",
                  "eta_eff": "eta_eff", "n_max": "n_max", "bias": "bias", "k": "k",
                  "alpha": "alpha", "threshold": "threshold"}


def _overrides(args):
    return {p: getattr(args, f) for f, p in _FLAG_TO_PARAM.items()
            if getattr(args, f, None) is not None}


def resolve_parameters(args):
    """Defaults, then config-file [fixed] values, then flags."""
    vals = dict(DEFAULTS)
    selection = "min_detuning"
    if args.config:
        fixed, selection = load_parameters(args.config)
        vals.update(fixed)
    vals.update(_overrides(args))
    if getattr(args, "selection", None):
        selection = args.selection
    if "n0" in vals and "m0" in vals and not getattr(args, "selection", None):
        selection = "manual"
    return vals, selection


def _plain(v):
    if isinstance(v, enum.Enum):
        return v.value
    if dataclasses.is_dataclass(v):
        return {f.name: _plain(getattr(v, f.name)) for f in dataclasses.fields(v)}
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return "inf" if math.isinf(v) else v
    return v


def _text(d, prefix=""):
    lines = []
    for k, v in d.items():
        if isinstance(v, dict):
            lines.extend(_text(v, f"{prefix}{k}."))
        elif isinstance(v, float):
            lines.append(f"{prefix}{k} = {v!r}")
        else:
            lines.append(f"{prefix}{k} = {v}")
    return lines


def _emit(payload, args):
    payload = _plain(payload)
    if args.format == "json":
        text = json.dumps(payload, indent=1) + "\n"
    else:
        text = "\n".join(_text(payload)) + "\n"
    _write(text, args)


def _write(text, args):
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _jobs(args):
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("RABIQPT_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"RABIQPT_JOBS must be an integer, got {env!r}")
    return 1


def _table(rows, columns):
    return {"columns": columns, "rows": rows}


def _table_text(columns, rows):
    out = [",".join(columns)]
    for r in rows:
        out.append(",".join(format(c, ".17g") if isinstance(c, float) else str(c) for c in r))
    return "\n".join(out) + "\n"


def cmd_effective(args):
    vals, sel = resolve_parameters(args)
    params, mod, model = build_point(vals, sel)
    report = rwa_validity(params, mod, model, vals["threshold"])
    _emit({"parameters": vals, "selection": sel, "model": model, "rwa": report}, args)


def cmd_phase(args):
    vals, sel = resolve_parameters(args)
    _, _, model = build_point(vals, sel)
    rc = reduced_couplings(model)
    res = phase_point(rc, model)
    _emit({"parameters": vals, "lambda": rc.lam, "mu": rc.mu, "result": res}, args)


def cmd_ed(args):
    vals, sel = resolve_parameters(args)
    if "n_max" not in vals:
        raise UsageError("ed: --n-max is required")
    _, _, model = build_point(vals, sel)
    space = FockSpace(int(vals["n_max"]))
    res = ground_state_ed(model, space, vals["bias"], int(vals["k"]))
    obs = ed_observables(res.states[:, 0], space)
    _emit({"parameters": vals, "energies": res.energies, "parities": res.parities,
           "gap": res.gap, "observables": obs}, args)


def cmd_fidelity(args):
    vals, sel = resolve_parameters(args)
    params, mod, model = build_point(vals, sel)
    space = FockSpace(int(vals.get("n_max", 24)))
    times = 2 * math.pi / params.omega0 * np.linspace(0.0, args.t_max, args.points)
    control = Integrator(method=args.method, dt=args.dt)
    tr = fidelity_trace(params, mod, model, times, alpha=vals["alpha"], space=space,
                        control=control)
    rows = [[float(t), float(f)] for t, f in zip(times * params.omega0 / (2 * math.pi),
                                                  tr.fidelity)]
    _emit_table(["t", "fidelity"], rows, vals, args)


def _emit_table(columns, rows, vals, args):
    if args.format == "json":
        _emit({"parameters": vals, **_table(rows, columns)}, args)
    else:
        _write(_table_text(columns, rows), args)


def cmd_a2(args):
    vals, _ = resolve_parameters(args)
    gs = args.g or [vals["g"]]
    chis = args.chi or [vals["chi"]]
    rows = []
    for g in gs:
        for chi in chis:
            params = SystemParams.from_eta(vals["eta"], g=g, chi=chi)
            g_a2, wc = a2_amplitude(params)
            rows.append([g, chi, g_a2 / (2 * wc), g_a2 / g if g > 0 else 0.0])
    _emit_table(["g", "chi", "g_a2/(2wc')", "g_a2/g"], rows, vals, args)


def cmd_boundary(args):
    vals, sel = resolve_parameters(args)
    fixed = {k: v for k, v in vals.items() if k != args.axis and k in PARAMETERS}
    spec = SweepSpec([Axis(args.axis, args.min, args.max, args.count)], fixed,
                     ("g_C", "g_tilde_C", "g_C_diss"), selection=sel)
    result = run_sweep(spec, jobs=_jobs(args))
    _emit_sweep(result, args)


def _emit_sweep(result, args):
    fmt = args.format or "csv"
    if fmt == "text":
        fmt = "csv"
    if args.out:
        export_table(result, fmt, args.out)
    else:
        sys.stdout.write(to_csv(result) if fmt == "csv" else to_json(result) + "\n")


def cmd_sweep(args):
    if args.config and args.preset:
        raise UsageError("sweep: use either --config or --preset, not both")
    if args.config:
        spec = load_config(args.config)
    elif args.preset:
        spec = figure_preset(args.preset)
    else:
        raise UsageError("sweep: one of --config or --preset is required\n" + CONFIG_GRAMMAR)
    over = _overrides(args)
    swept = {a.name for a in spec.axes}
    clash = swept & set(over)
    if clash:
        raise UsageError(f"sweep: cannot fix swept parameter(s) {sorted(clash)}")
    fixed = {**spec.fixed, **over}
    spec = SweepSpec(spec.axes, fixed, spec.quantities, args.selection or spec.selection,
                     spec.engine, spec.name)
    _emit_sweep(run_sweep(spec, jobs=_jobs(args)), args)


COMMANDS = {"effective": cmd_effective, "phase": cmd_phase, "sweep": cmd_sweep, "ed": cmd_ed,
            "fidelity": cmd_fidelity, "a2": cmd_a2, "boundary": cmd_boundary}


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (InvalidSweepSpec, UnknownPreset, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RabiQPTError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
