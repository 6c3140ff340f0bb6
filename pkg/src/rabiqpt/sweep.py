"""Parameter sweeps, figure presets and table export.

A sweep is a 1- or 2-axis grid over named parameters. Every grid point is
evaluated independently (optionally in a process pool) and lands in exactly
one row; failures become marker cells instead of dropping the point.

Parameter names (frequencies in units of omega0):
    eta, g, chi, kappa    bare model (eta = omega0/omega_c)
    xi, nu                modulation amplitude and frequency
    n0, m0                manual sideband indices
    lambda, mu            override the couplings as multiples of g_C
    eta_eff               build the effective model directly (ED studies)
    alpha, n_max, t       coherent amplitude, Fock cutoff, time in omega0 t / 2 pi
    bias, threshold, k    ED bias field, RWA threshold, number of ED levels
"""

from __future__ import annotations

import configparser
import csv
import datetime
import enum
import hashlib
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AmbiguousBoundary, InvalidSweepSpec, RabiQPTError, UnknownPreset
from .fock import FockSpace, ed_observables, fidelity_trace, ground_state_ed
from .model import (Marker, ModulationParams, SelectionMode, SystemParams, a2_amplitude,
                    anisotropic_model, effective_model, g_c_dissipative, reduced_model,
                    rwa_validity, select_sidebands)
from .phases import energy_derivatives, phase_point, reduced_couplings

DEFAULTS = {"eta": 100.0, "g": 0.06, "chi": 0.0, "kappa": 0.0, "xi": 1.5, "nu": 0.68,
            "alpha": 0.1, "threshold": 0.2, "bias": 0.0, "k": 2}
PARAMETERS = set(DEFAULTS) | {"n0", "m0", "lambda", "mu", "eta_eff", "n_max", "t"}


class Engine(str, enum.Enum):
    ANALYTIC = "analytic"
    ED = "ed"
    DYNAMICS = "dynamics"


MODEL_QUANTITIES = ("n0", "m0", "omega0_eff", "omega_c_eff", "eta_eff", "g_C", "g_tilde_C",
                    "g_C_diss", "lambda", "mu", "epsilon", "a2_ratio", "rwa_pass")
PHASE_QUANTITIES = ("phase", "omega", "x_mean", "p_mean", "var_x", "var_p", "ground_energy",
                    "squeeze", "alpha", "Omega_k", "dE_dlambda", "dE_dmu", "d2E_dlambda2",
                    "d2E_dmu2")
ED_QUANTITIES = ("ed_E0", "ed_gap", "ed_n_mean", "ed_x_mean", "ed_p_mean", "ed_var_x",
                 "ed_var_p", "ed_parity")
DYNAMICS_QUANTITIES = ("fidelity",)
ENGINE_QUANTITIES = {
    Engine.ANALYTIC: set(MODEL_QUANTITIES) | set(PHASE_QUANTITIES),
    Engine.ED: set(MODEL_QUANTITIES) | set(ED_QUANTITIES),
    Engine.DYNAMICS: set(MODEL_QUANTITIES) | set(DYNAMICS_QUANTITIES),
}


@dataclass(frozen=True)
class Axis:
    """Linearly spaced axis, or explicit ``values`` when given."""

    name: str
    min: float = 0.0
    max: float = 0.0
    count: int = 2
    values: tuple | None = None

    def grid(self):
        if self.values is not None:
            return [float(v) for v in self.values]
        return [float(v) for v in np.linspace(self.min, self.max, self.count)]

    def __len__(self):
        return len(self.values) if self.values is not None else self.count


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    fixed: dict = field(default_factory=dict)
    quantities: tuple = ()
    selection: str = SelectionMode.MIN_DETUNING.value
    engine: str = Engine.ANALYTIC.value
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        validate(self)

    def to_dict(self):
        d = asdict(self)
        for ax in d["axes"]:
            if ax["values"] is not None:
                ax["values"] = list(ax["values"])
        d["quantities"] = list(self.quantities)
        return d


@dataclass(frozen=True)
class GridResult:
    spec: dict
    columns: list
    rows: list
    provenance: dict


def validate(spec):
    if not 1 <= len(spec.axes) <= 2:
        raise InvalidSweepSpec("a sweep needs one or two axes")
    names = [a.name for a in spec.axes]
    if len(set(names)) != len(names):
        raise InvalidSweepSpec(f"duplicate axis names {names}")
    for ax in spec.axes:
        if ax.values is not None:
            if len(ax.values) < 1:
                raise InvalidSweepSpec(f"axis {ax.name} has no values")
        elif ax.count < 2 and not (ax.count == 1 and ax.min == ax.max):
            raise InvalidSweepSpec(f"axis {ax.name} needs count >= 2")
    unknown = (set(names) | set(spec.fixed)) - PARAMETERS
    if unknown:
        raise InvalidSweepSpec(f"unknown parameters {sorted(unknown)}")
    clash = set(names) & set(spec.fixed)
    if clash:
        raise InvalidSweepSpec(f"parameters both swept and fixed: {sorted(clash)}")
    try:
        engine = Engine(spec.engine)
        SelectionMode(spec.selection)
    except ValueError as exc:
        raise InvalidSweepSpec(str(exc)) from None
    bad = set(spec.quantities) - ENGINE_QUANTITIES[engine]
    if bad:
        raise InvalidSweepSpec(f"quantities {sorted(bad)} not available with engine {engine.value}")
    if engine in (Engine.ED, Engine.DYNAMICS) and "n_max" not in set(names) | set(spec.fixed):
        raise InvalidSweepSpec(f"engine {engine.value} needs an n_max cutoff")
    if engine is Engine.DYNAMICS and "t" not in names:
        raise InvalidSweepSpec("dynamics sweeps need a 't' axis")


# point evaluation -----------------------------------------------------------

def _cell(value):
    if isinstance(value, Marker):
        return value.value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if math.isinf(value):
        return Marker.INF.value
    if math.isnan(value):
        return "nan"
    return value


def _error_cell(exc):
    if isinstance(exc, AmbiguousBoundary):
        return Marker.BOUNDARY.value
    return f"error:{type(exc).__name__}"


def resolve(spec, coords):
    vals = dict(DEFAULTS)
    vals.update(spec.fixed)
    vals.update(coords)
    return vals


def build_point(vals, selection):
    """(params, mod, model) for one resolved parameter set."""
    params = SystemParams.from_eta(vals["eta"], g=vals["g"], chi=vals["chi"],
                                   kappa=vals["kappa"])
    mod = ModulationParams(vals["xi"], vals["nu"])
    if "eta_eff" in vals:
        return params, mod, reduced_model(vals["eta_eff"], vals.get("lambda", 0.0),
                                          vals.get("mu", 0.0))
    sel = select_sidebands(params, mod, selection, vals.get("n0"), vals.get("m0"))
    model = effective_model(params, mod, sel)
    if "lambda" in vals or "mu" in vals:
        g_r = vals["lambda"] * model.g_C if "lambda" in vals else model.g_r
        g_cr = vals["mu"] * model.g_C if "mu" in vals else model.g_cr
        model = anisotropic_model(model.omega0_eff, model.omega_c_eff, g_r, g_cr,
                                  omega_c_prime=model.omega_c_prime, g_a2=model.g_a2,
                                  selection=sel)
    return params, mod, model


def _model_quantity(q, vals, params, mod, model):
    if q == "n0":
        return model.selection.n0
    if q == "m0":
        return model.selection.m0
    if q in ("omega0_eff", "omega_c_eff", "eta_eff", "g_C", "g_tilde_C", "epsilon"):
        return getattr(model, q)
    if q == "g_C_diss":
        return g_c_dissipative(model, params.kappa)
    if q == "lambda":
        return reduced_couplings(model).lam
    if q == "mu":
        return reduced_couplings(model).mu
    if q == "a2_ratio":
        g_a2, wc = a2_amplitude(params)
        return g_a2 / (2 * wc)
    if q == "rwa_pass":
        return rwa_validity(params, mod, model, vals["threshold"]).passed
    raise KeyError(q)


_DERIVS = {"dE_dlambda": (1, "lambda"), "dE_dmu": (1, "mu"),
           "d2E_dlambda2": (2, "lambda"), "d2E_dmu2": (2, "mu")}
_POINT_FIELDS = {"phase": "label", "omega": "excitation", "x_mean": "x_mean",
                 "p_mean": "p_mean", "var_x": "var_x", "var_p": "var_p",
                 "ground_energy": "ground_energy", "squeeze": "squeeze", "alpha": "alpha",
                 "Omega_k": "Omega_k"}


def _evaluate_row(spec, coords):
    vals = resolve(spec, coords)
    try:
        params, mod, model = build_point(vals, spec.selection)
    except RabiQPTError as exc:
        # the A^2 audit only needs the bare parameters
        cells = []
        for q in spec.quantities:
            try:
                if q != "a2_ratio":
                    raise exc
                params = SystemParams.from_eta(vals["eta"], g=vals["g"], chi=vals["chi"])
                cells.append(_cell(_model_quantity(q, vals, params, None, None)))
            except RabiQPTError as err:
                cells.append(_error_cell(err))
        return cells
    cells = []
    point = ed = None
    for q in spec.quantities:
        try:
            if q in MODEL_QUANTITIES:
                v = _model_quantity(q, vals, params, mod, model)
            elif q in _DERIVS:
                order, direction = _DERIVS[q]
                v = energy_derivatives(reduced_couplings(model), model, order, direction)
            elif q in _POINT_FIELDS:
                if point is None:
                    point = phase_point(reduced_couplings(model), model)
                v = getattr(point, _POINT_FIELDS[q])
            else:
                if ed is None:
                    space = FockSpace(int(vals["n_max"]))
                    res = ground_state_ed(model, space, vals["bias"], int(vals["k"]))
                    ed = (res, ed_observables(res.states[:, 0], space))
                res, obs = ed
                if q == "ed_E0":
                    v = res.energies[0]
                elif q == "ed_gap":
                    v = res.gap
                else:
                    v = getattr(obs, q[3:])
            cells.append(_cell(v))
        except (RabiQPTError, ValueError, ZeroDivisionError) as exc:
            cells.append(_error_cell(exc))
    return cells


def _evaluate_rows(spec, chunk):
    return [_evaluate_row(spec, c) for c in chunk]


def _evaluate_trajectory(spec, coords, t_values):
    """Fidelity column for every t at fixed other coordinates."""
    vals = resolve(spec, coords)
    try:
        params, mod, model = build_point(vals, spec.selection)
        times = 2 * math.pi / params.omega0 * np.asarray(t_values)
        grid = np.union1d([0.0], times)
        tr = fidelity_trace(params, mod, model, grid, alpha=vals["alpha"],
                            space=FockSpace(int(vals["n_max"])))
        fid = np.interp(times, grid, tr.fidelity)
        fid_cells = [_cell(f) for f in fid]
    except RabiQPTError as exc:
        params = mod = model = None
        fid_cells = [_error_cell(exc)] * len(t_values)
    rows = []
    for i in range(len(t_values)):
        row = []
        for q in spec.quantities:
            if q == "fidelity":
                row.append(fid_cells[i])
            elif model is None:
                row.append(fid_cells[i])
            else:
                try:
                    row.append(_cell(_model_quantity(q, vals, params, mod, model)))
                except RabiQPTError as exc:
                    row.append(_error_cell(exc))
        rows.append(row)
    return rows


def _chunks(seq, n):
    size = max(1, math.ceil(len(seq) / n))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def spec_hash(spec):
    blob = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_sweep(spec, jobs=1):
    """Evaluate every grid point of ``spec``.

    Rows follow the axis order (first axis outermost) regardless of ``jobs``.
    """
    axes = spec.axes
    names = [a.name for a in axes]
    grid = list(itertools.product(*(a.grid() for a in axes)))
    coords = [dict(zip(names, pt)) for pt in grid]
    engine = Engine(spec.engine)

    if engine is Engine.DYNAMICS:
        t_pos = names.index("t")
        t_values = axes[t_pos].grid()
        others = [a for a in axes if a.name != "t"]
        groups = [dict(zip([a.name for a in others], pt))
                  for pt in itertools.product(*(a.grid() for a in others))]
        args = [(spec, g, t_values) for g in groups]
        if jobs > 1 and len(args) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                blocks = list(pool.map(_evaluate_trajectory, *zip(*args)))
        else:
            blocks = [_evaluate_trajectory(*a) for a in args]
        lookup = {}
        for g, block in zip(groups, blocks):
            for t, row in zip(t_values, block):
                lookup[(tuple(sorted(g.items())), t)] = row
        values = []
        for c in coords:
            key = tuple(sorted((k, v) for k, v in c.items() if k != "t"))
            values.append(lookup[(key, c["t"])])
    elif jobs > 1 and len(coords) > 1:
        chunks = _chunks(coords, jobs * 4)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_evaluate_rows, [spec] * len(chunks), chunks)
            values = [row for part in parts for row in part]
    else:
        values = [_evaluate_row(spec, c) for c in coords]

    rows = [[_cell(v) for v in pt] + vals for pt, vals in zip(grid, values)]
    provenance = {
        "code_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "spec_hash": spec_hash(spec),
    }
    return GridResult(spec.to_dict(), names + list(spec.quantities), rows, provenance)


# export ---------------------------------------------------------------------

def _fmt(cell):
    if isinstance(cell, float):
        return format(cell, ".17g")
    return str(cell)


def to_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_fmt(c) for c in row])
    return buf.getvalue()


def to_json(result):
    return json.dumps({"spec": result.spec, "columns": result.columns, "rows": result.rows,
                       "provenance": result.provenance}, indent=1, allow_nan=False)


def export_table(result, fmt, destination):
    """Write ``result`` as CSV or JSON to a path or an open text stream."""
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown export format {fmt!r}")
    text = to_csv(result) if fmt == "csv" else to_json(result)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {fmt} table to {path}: {exc}") from exc


def load_json(source):
    data = json.loads(Path(source).read_text(encoding="utf-8"))
    return GridResult(data["spec"], data["columns"], data["rows"], data["provenance"])


def spec_from_dict(d):
    axes = [Axis(a["name"], a.get("min", 0.0), a.get("max", 0.0), a.get("count", 2),
                 tuple(a["values"]) if a.get("values") is not None else None)
            for a in d["axes"]]
    return SweepSpec(axes, dict(d.get("fixed", {})), tuple(d.get("quantities", ())),
                     d.get("selection", SelectionMode.MIN_DETUNING.value),
                     d.get("engine", Engine.ANALYTIC.value), d.get("name", ""))


# config files ---------------------------------------------------------------

def _number(text):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def parse_axis(name, text):
    """``min, max, count`` for a linear axis or ``[v1, v2, ...]`` for explicit values."""
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise InvalidSweepSpec(f"axis {name}: unterminated value list")
        vals = [float(v) for v in text[1:-1].split(",") if v.strip()]
        return Axis(name, values=tuple(vals))
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise InvalidSweepSpec(f"axis {name}: expected 'min, max, count', got {text!r}")
    return Axis(name, float(parts[0]), float(parts[1]), int(parts[2]))


def _read(text):
    cp = configparser.ConfigParser(allow_no_value=True, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidSweepSpec(f"malformed config: {exc}") from None
    return cp


def load_parameters(path):
    """([fixed] values, selection) from a config file, without requiring axes."""
    cp = _read(Path(path).read_text(encoding="utf-8"))
    fixed = {k: _number(v) for k, v in cp["fixed"].items()} if cp.has_section("fixed") else {}
    unknown = set(fixed) - PARAMETERS
    if unknown:
        raise InvalidSweepSpec(f"unknown parameters {sorted(unknown)}")
    head = dict(cp["sweep"]) if cp.has_section("sweep") else {}
    return fixed, head.get("selection", SelectionMode.MIN_DETUNING.value)


def parse_config(text):
    """Parse the key=value sweep grammar (sections [sweep], [axes], [fixed], [quantities])."""
    cp = _read(text)
    head = dict(cp["sweep"]) if cp.has_section("sweep") else {}
    base = None
    if "preset" in head:
        base = figure_preset(head["preset"])
    axes = ([parse_axis(k, v) for k, v in cp["axes"].items()] if cp.has_section("axes")
            else list(base.axes) if base else [])
    fixed = dict(base.fixed) if base else {}
    if cp.has_section("fixed"):
        for k, v in cp["fixed"].items():
            fixed[k] = _number(v)
    for ax in axes:
        fixed.pop(ax.name, None)
    quantities = (list(cp["quantities"].keys()) if cp.has_section("quantities")
                  else list(base.quantities) if base else [])
    return SweepSpec(
        axes, fixed, quantities,
        head.get("selection", base.selection if base else SelectionMode.MIN_DETUNING.value),
        head.get("engine", base.engine if base else Engine.ANALYTIC.value),
        head.get("name", base.name if base else ""),
    )


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


# presets --------------------------------------------------------------------

_FIG5 = {"eta": 100.0, "nu": 0.68, "g": 0.06, "chi": 0.0}


def _preset_table():
    lm = {"eta": 100.0, "nu": 0.68, "g": 0.06, "chi": 0.0}
    p = {
        "fig2a": SweepSpec([Axis("eta", values=(100.0, 1000.0)), Axis("nu", 0.05, 2.5, 300)],
                           {"g": 0.06, "xi": 1.5}, ("eta_eff", "n0", "m0")),
        "fig2b": SweepSpec([Axis("xi", 0.0, 12.0, 1201)],
                           {"eta": 1.0, "nu": 0.49, "g": 0.06, "n0": -1, "m0": -4},
                           ("lambda", "mu"), selection=SelectionMode.MANUAL.value),
        "fig2c": SweepSpec([Axis("xi", 0.0, 12.0, 1201)], dict(_FIG5), ("lambda", "mu")),
        "fig3": SweepSpec([Axis("nu", values=(0.402, 0.68, 0.8)), Axis("xi", 0.0, 12.0, 1201)],
                          {"eta": 100.0, "g": 0.06}, ("g_tilde_C",)),
        "fig4a": SweepSpec([Axis("mu", -3.0, 3.0, 300)], {**lm, "lambda": 1.0},
                           ("phase", "omega")),
        "fig4b": SweepSpec([Axis("mu", -3.0, 3.0, 300)], {**lm, "lambda": 2.5},
                           ("phase", "omega")),
        "fig4c": SweepSpec([Axis("mu", -3.0, 3.0, 300)], {**lm, "lambda": 0.0},
                           ("phase", "omega")),
        "fig4d": SweepSpec([Axis("lambda", -3.0, 3.0, 300)], {**lm, "mu": 0.0},
                           ("phase", "omega")),
        "fig5": SweepSpec([Axis("xi", 0.0, 3.0, 300)], dict(_FIG5), ("phase", "omega")),
        "fig6": SweepSpec([Axis("lambda", -3.0, 3.0, 121), Axis("mu", -3.0, 3.0, 121)], lm,
                          ("phase", "x_mean", "p_mean")),
        "fig7": SweepSpec([Axis("xi", 0.0, 3.0, 300)], dict(_FIG5),
                          ("lambda", "mu", "phase", "x_mean", "p_mean")),
        "fig8": SweepSpec([Axis("lambda", -3.0, 3.0, 121), Axis("mu", -3.0, 3.0, 121)], lm,
                          ("phase", "dE_dlambda", "dE_dmu", "d2E_dlambda2", "d2E_dmu2")),
        "fig10a": SweepSpec([Axis("g", 0.0, 0.1, 121), Axis("chi", 0.0, 2.5, 121)],
                            {"eta": 100.0}, ("a2_ratio",)),
        "fig10b": SweepSpec([Axis("g", 0.0, 0.1, 121), Axis("chi", 0.0, 10.0, 121)],
                            {"eta": 1.0}, ("a2_ratio",)),
        "fig14": SweepSpec([Axis("nu", values=(0.49, 0.68, 1.0)), Axis("t", 0.0, 10.0, 201)],
                           {"eta": 100.0, "g": 0.06, "chi": 0.0, "xi": 1.5, "alpha": 0.1,
                            "n_max": 24}, ("fidelity",), engine=Engine.DYNAMICS.value),
    }
    return p


PRESETS = tuple(_preset_table())


def figure_preset(name):
    """Sweep specification reproducing the data behind a figure.

    ``fig2b`` runs with the stated manual sidebands (n0=-1, m0=-4) but does
    not reproduce the published curve.
    """
    table = _preset_table()
    if name not in table:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(table)}")
    spec = table[name]
    return SweepSpec(spec.axes, spec.fixed, spec.quantities, spec.selection, spec.engine, name)
