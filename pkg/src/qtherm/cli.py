"""Command-line front end: parses experiment configs, runs any module's
experiment, and emits machine-readable results.

Config format is INI-style (key = value) with sections::

    [experiment]
    name = otto

    [parameters]
    omega_a = 2.0
    omega_b = 1.0
    t_h = 4.0
    t_c = 1.0

    [sweep]            ; optional
    key = omega_b
    from = 0.5
    to = 1.5
    steps = 11
    scale = linear     ; or log

    [output]           ; optional, defaults to CSV on stdout
    path = out.csv
    format = csv       ; or json

    [run]              ; optional
    seed = 42
    threads = 4

Units: hbar = k_B = 1; energies and temperatures share one energy unit,
times are in its inverse.

Exit codes: 0 success, 2 config error, 3 numeric/model error,
4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__, battery, cycles, floquet, metrology, sta
from .errors import QThermError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4


# --- experiment registry -----------------------------------------------------


@dataclass(frozen=True)
class Param:
    """One typed experiment parameter; ``default`` None means required."""

    kind: type  # float, int, bool, str, or list (comma-separated floats)
    default: object = None
    required: bool = True
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    choices: Optional[tuple] = None


def opt(kind, default, **kw):
    return Param(kind, default=default, required=False, **kw)


@dataclass(frozen=True)
class Experiment:
    params: Dict[str, Param]
    runner: Callable[[dict], dict]
    multi_row: bool = False


def _cycle_row(rep: cycles.CycleReport) -> dict:
    return {
        "net_work_output": rep.net_work_output,
        "q_hot": rep.q_hot,
        "q_cold": rep.q_cold,
        "efficiency": np.nan if rep.efficiency is None else rep.efficiency,
        "cop": np.nan if rep.cop is None else rep.cop,
        "mode": rep.mode,
        "carnot_margin": rep.carnot_margin,
    }


def _trace_row(trace: battery.ChargeTrace) -> dict:
    return {
        "energy_max": float(np.max(trace.energies)),
        "power_max": float(np.max(trace.powers)),
        "variance_max": float(np.max(trace.variances)),
        "fisher_mean": float(np.mean(trace.energy_fisher)),
        "bound_violation": battery.power_bound_check(trace),
        "final_fraction": trace.final_fraction,
        "tau_mt": trace.qsl.tau_mt,
        "tau_unified": trace.qsl.tau_unified,
    }


def _run_maser(p):
    rep = cycles.maser_analyze(p["omega_h"], p["omega_c"], p["t_h"], p["t_c"])
    return {"eta": rep.eta, "cop": rep.cop, "inversion": int(rep.inversion),
            "mode": rep.mode}


def _run_box_carnot(p):
    return _cycle_row(cycles.box_carnot(p["l_a"], p["l_b"], p["mass"]))


def _run_otto(p):
    return _cycle_row(cycles.otto_qho(p["omega_a"], p["omega_b"], p["t_h"],
                                      p["t_c"]))


def _run_otto_squeezed(p):
    return _cycle_row(cycles.otto_squeezed(p["omega_a"], p["omega_b"],
                                           p["t_h"], p["t_c"], p["r"]))


def _run_otto_numeric(p):
    return _cycle_row(cycles.otto_numeric(
        p["omega_a"], p["omega_b"], p["t_h"], p["t_c"], p["ramp_duration"],
        p["thermalization_time"], p["n_max"], p["kappa"]))


def _run_two_stroke(p):
    return _cycle_row(cycles.two_stroke(p["omega_k"], p["omega_un"], p["t_h"],
                                        p["t_c"], p["theta"]))


def _run_ctm(p):
    amplitude = p["amplitude"] if p["amplitude"] > 0 else None
    cfg = floquet.spectral_separation_preset(
        p["omega0"], p["drive_frequency"], p["t_hot"], p["t_cold"],
        rate=p["rate"], amplitude=amplitude, waveform=p["waveform"])
    rep = floquet.ctm_currents(cfg, m_max=p["m_max"])
    return {
        "r": rep.r, "j_hot": rep.j_hot, "j_cold": rep.j_cold,
        "power": rep.power, "mode": rep.mode,
        "efficiency_or_cop": (np.nan if rep.efficiency_or_cop is None
                              else rep.efficiency_or_cop),
        "omega_cr": rep.omega_cr,
    }


def _run_sta_ermakov(p):
    sched = sta.ermakov_schedule(p["omega_i"], p["omega_f"], p["tau"])
    grid = np.linspace(0.0, p["tau"], 1001)
    drift = sta.verify_ermakov_invariant(sched, n_max=p["n_max"],
                                         temperature=p["temperature"])
    return {
        "b_final": float(sched.b(p["tau"])),
        "omega_squared_min": float(np.min(sched.omega_squared(grid))),
        "invariant_drift": drift,
    }


def _run_sta_cd(p):
    delta, v, t = p["delta"], p["velocity"], p["t"]
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)

    def h0(tt):
        return delta * sx + (-v * tt) * sz

    h_cd = sta.counterdiabatic(h0, t, p["dt"])
    coeff = float(np.real(1j * h_cd[0, 1]))
    closed = 0.5 * delta * v / (delta**2 + (v * t) ** 2)
    return {"cd_coefficient": coeff, "closed_form": closed,
            "residual": abs(coeff - closed)}


def _run_outcoupled(p):
    params = cycles.OutcoupledParams(delta=p["delta"], g=p["g"], b=p["b"],
                                     n_fock=p["n_fock"])
    works = cycles.outcoupled_multicycle(params, p["n_cycles"],
                                         p["per_cycle_measurement"])
    return {"cycle": list(range(1, len(works) + 1)),
            "mean_work": [float(w) for w in works]}


def _run_qfi(p):
    omega = p["omega"]

    def thermal_qubit(temp):
        pe = 1.0 / (1.0 + np.exp(omega / temp))
        return np.diag([1.0 - pe, pe]).astype(complex)

    rep = metrology.qfi(metrology.ParamFamily(thermal_qubit),
                        p["temperature"])
    return {"qfi": rep.qfi, "cramer_rao_floor": rep.cramer_rao_floor}


def _run_thermometry(p):
    grid = np.linspace(p["t_h_min"], p["t_h_max"], p["t_h_steps"])
    res = metrology.thermometry_simulate(
        p["omega_h"], p["omega_c"], p["kappa_h"], p["kappa_c"], p["g"],
        p["t_c_true"], grid, n_max=p["n_max"])
    return {"null_location": res.null_location,
            "t_c_estimate": res.estimated_parameter,
            "error_estimate": res.error_estimate}


def _run_magnetometry(p):
    grid = np.linspace(p["omega_k_min"], p["omega_k_max"],
                       p["omega_k_steps"])
    res = metrology.magnetometry_null(p["omega_un_true"], p["t_h"], p["t_c"],
                                      p["theta"], grid)
    return {"null_location": res.null_location,
            "omega_un_estimate": res.estimated_parameter,
            "error_estimate": res.error_estimate}


def _diag_state(p):
    energies = np.asarray(p["energies"], dtype=float)
    pops = np.asarray(p["populations"], dtype=float)
    if len(energies) != len(pops):
        raise QThermError("energies and populations differ in length")
    return np.diag(pops).astype(complex), np.diag(energies).astype(complex)


def _run_ergotropy(p):
    rho, h = _diag_state(p)
    rep = battery.ergotropy(rho, h)
    return {"ergotropy": rep.ergotropy, "passive_energy": rep.passive_energy,
            "thermal_bound": rep.thermal_bound, "bound_gap": rep.bound_gap,
            "effective_beta": rep.effective_beta}


def _run_n_copy(p):
    rho, h = _diag_state(p)
    e = battery.n_copy_passive_energy(rho, h, p["n_copies"])
    return {"energy_per_cell": e}


def _run_qsl(p):
    omega, tau = p["omega"], p["tau"]
    times = np.linspace(0.0, tau, p["samples"])
    h = 0.5 * omega * np.diag([1.0, -1.0]).astype(complex)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    traj = []
    for t in times:
        psi = np.exp(-1j * np.array([omega / 2, -omega / 2]) * t) * plus
        traj.append((float(t), np.outer(psi, psi.conj())))
    rep = battery.qsl_report(traj, lambda t: h)
    return {"bures_distance": rep.bures_distance, "tau_mt": rep.tau_mt,
            "tau_unified": rep.tau_unified, "actual_tau": rep.actual_tau}


def _run_charge_xxz(p):
    trace = battery.charge_spins_xxz(
        p["n_cells"], p["b"], p["g"], p["alpha"], p["nu"],
        p["interaction_range"], p["omega"], p["tau"], p["dt"])
    return _trace_row(trace)


def _run_charge_lmg(p):
    trace = battery.charge_lmg(p["n_cells"], p["lam"], p["gamma"], p["b"],
                               p["tau"], p["dt"])
    return _trace_row(trace)


def _dicke_trace(p):
    return battery.charge_dicke(
        p["n_cells"], p["n_photons"], p["lam"], p["rescale"], p["omega"],
        p["omega_c"], p["photon_cutoff"], p["tau"], p["dt"])


def _run_charge_dicke(p):
    return _trace_row(_dicke_trace(p))


def _run_advantage(p):
    collective = _dicke_trace(p)
    single = battery.charge_dicke(1, 1, p["lam"], False, p["omega"],
                                  p["omega_c"], 20, p["tau"], p["dt"])
    parallel = dataclasses.replace(single,
                                   energies=p["n_cells"] * single.energies)
    target = collective.energies[0] + (p["target_fraction"] * p["n_cells"]
                                       * p["omega"])
    gamma = battery.quantum_advantage(parallel, collective,
                                      target_energy=target)
    return {"gamma": gamma}


_TEMPS = {"t_h": Param(float), "t_c": Param(float)}
_DIAG = {"energies": Param(list), "populations": Param(list)}
_DICKE = {
    "n_cells": Param(int, minimum=1), "n_photons": Param(int, minimum=0),
    "lam": Param(float), "rescale": opt(bool, False),
    "omega": opt(float, 1.0), "omega_c": opt(float, 1.0),
    "photon_cutoff": Param(int, minimum=1),
    "tau": Param(float, minimum=0.0), "dt": Param(float, minimum=0.0),
}

EXPERIMENTS: Dict[str, Experiment] = {
    "maser": Experiment(
        {"omega_h": Param(float), "omega_c": Param(float), **_TEMPS},
        _run_maser),
    "box-carnot": Experiment(
        {"l_a": Param(float), "l_b": Param(float), "mass": Param(float)},
        _run_box_carnot),
    "otto": Experiment(
        {"omega_a": Param(float), "omega_b": Param(float), **_TEMPS},
        _run_otto),
    "otto-squeezed": Experiment(
        {"omega_a": Param(float), "omega_b": Param(float), **_TEMPS,
         "r": Param(float, minimum=0.0)},
        _run_otto_squeezed),
    "otto-numeric": Experiment(
        {"omega_a": Param(float), "omega_b": Param(float), **_TEMPS,
         "ramp_duration": Param(float, minimum=0.0),
         "thermalization_time": Param(float, minimum=0.0),
         "n_max": opt(int, 40, minimum=2), "kappa": opt(float, 1.0)},
        _run_otto_numeric),
    "two-stroke": Experiment(
        {"omega_k": Param(float), "omega_un": Param(float), **_TEMPS,
         "theta": Param(float, minimum=0.0, maximum=float(np.pi))},
        _run_two_stroke),
    "ctm": Experiment(
        {"omega0": Param(float), "drive_frequency": Param(float),
         "t_hot": Param(float), "t_cold": Param(float),
         "rate": opt(float, 1.0), "amplitude": opt(float, 0.0),
         "waveform": opt(str, "sinusoidal",
                         choices=("constant", "sinusoidal",
                                  "piecewise_asymmetric")),
         "m_max": opt(int, 40, minimum=1)},
        _run_ctm),
    "sta-ermakov": Experiment(
        {"omega_i": Param(float), "omega_f": Param(float),
         "tau": Param(float, minimum=0.0), "n_max": opt(int, 30, minimum=2),
         "temperature": opt(float, 1.0)},
        _run_sta_ermakov),
    "sta-cd": Experiment(
        {"delta": Param(float), "velocity": Param(float),
         "t": Param(float), "dt": opt(float, 1e-6)},
        _run_sta_cd),
    "outcoupled": Experiment(
        {"n_cycles": Param(int, minimum=1),
         "per_cycle_measurement": opt(bool, False),
         "delta": opt(float, 1.0), "g": opt(float, 0.02),
         "b": opt(float, 0.1), "n_fock": opt(int, 30, minimum=2)},
        _run_outcoupled, multi_row=True),
    "qfi": Experiment(
        {"omega": Param(float), "temperature": Param(float, minimum=0.0)},
        _run_qfi),
    "thermometry": Experiment(
        {"omega_h": Param(float), "omega_c": Param(float),
         "kappa_h": Param(float), "kappa_c": Param(float),
         "g": Param(float), "t_c_true": Param(float, minimum=0.0),
         "t_h_min": Param(float), "t_h_max": Param(float),
         "t_h_steps": Param(int, minimum=2), "n_max": opt(int, 400)},
        _run_thermometry),
    "magnetometry": Experiment(
        {"omega_un_true": Param(float), **_TEMPS,
         "theta": Param(float, minimum=0.0, maximum=float(np.pi)),
         "omega_k_min": Param(float), "omega_k_max": Param(float),
         "omega_k_steps": Param(int, minimum=2)},
        _run_magnetometry),
    "ergotropy": Experiment(dict(_DIAG), _run_ergotropy),
    "n-copy": Experiment(
        {**_DIAG, "n_copies": Param(int, minimum=1)}, _run_n_copy),
    "qsl": Experiment(
        {"omega": Param(float), "tau": Param(float, minimum=0.0),
         "samples": opt(int, 201, minimum=2)},
        _run_qsl),
    "charge-xxz": Experiment(
        {"n_cells": Param(int, minimum=1), "b": Param(float),
         "g": Param(float), "alpha": Param(float), "nu": Param(float),
         "interaction_range": opt(str, "power_law",
                                  choices=("nearest_neighbor", "power_law")),
         "omega": Param(float), "tau": Param(float, minimum=0.0),
         "dt": Param(float, minimum=0.0)},
        _run_charge_xxz),
    "charge-lmg": Experiment(
        {"n_cells": Param(int, minimum=1), "lam": Param(float),
         "gamma": Param(float), "b": Param(float),
         "tau": Param(float, minimum=0.0), "dt": Param(float, minimum=0.0)},
        _run_charge_lmg),
    "charge-dicke": Experiment(dict(_DICKE), _run_charge_dicke),
    "advantage": Experiment(
        {**_DICKE, "target_fraction": opt(float, 0.2, minimum=0.0,
                                          maximum=1.0)},
        _run_advantage),
}


# --- config parsing and validation ---------------------------------------------


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)  # raw strings
    sweep: Optional[dict] = None
    output_path: Optional[str] = None
    output_format: str = "csv"
    seed: Optional[int] = None
    threads: Optional[int] = None


def _convert(raw: str, kind: type):
    if kind is float:
        return float(raw)
    if kind is int:
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{raw!r} is not an integer")
        return int(v)
    if kind is bool:
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{raw!r} is not a boolean")
    if kind is list:
        return [float(x) for x in str(raw).split(",") if x.strip()]
    return str(raw)


def load_config(path: str, experiment: Optional[str] = None,
                overrides: Optional[dict] = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    name = experiment or parser.get("experiment", "name", fallback=None)
    cfg = ExperimentConfig(experiment=name or "")
    if parser.has_section("parameters"):
        cfg.parameters = dict(parser.items("parameters"))
    if overrides:
        cfg.parameters.update(overrides)
    if parser.has_section("sweep"):
        cfg.sweep = dict(parser.items("sweep"))
    if parser.has_section("output"):
        cfg.output_path = parser.get("output", "path", fallback=None)
        cfg.output_format = parser.get("output", "format", fallback="csv")
    if parser.has_section("run"):
        seed = parser.get("run", "seed", fallback=None)
        threads = parser.get("run", "threads", fallback=None)
        cfg.seed = int(seed) if seed is not None else None
        cfg.threads = int(threads) if threads is not None else None
    return cfg


def validate_config(cfg: ExperimentConfig) -> List[str]:
    """Full static validation; an empty list means the config is runnable."""
    diags: List[str] = []
    if cfg.experiment not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        diags.append(
            f"unknown experiment {cfg.experiment!r} (known: {known})")
        return diags
    exp = EXPERIMENTS[cfg.experiment]
    schema = exp.params
    for key in cfg.parameters:
        if key not in schema:
            diags.append(f"unknown parameter key {key!r} for "
                         f"{cfg.experiment}")
    for key, spec in schema.items():
        if key not in cfg.parameters:
            if spec.required:
                diags.append(f"missing required parameter {key!r}")
            continue
        try:
            val = _convert(cfg.parameters[key], spec.kind)
        except ValueError as exc:
            diags.append(f"parameter {key!r}: {exc}")
            continue
        if spec.minimum is not None and np.isscalar(val) \
                and not isinstance(val, str) and val < spec.minimum:
            diags.append(f"parameter {key!r} = {val} below minimum "
                         f"{spec.minimum}")
        if spec.maximum is not None and np.isscalar(val) \
                and not isinstance(val, str) and val > spec.maximum:
            diags.append(f"parameter {key!r} = {val} above maximum "
                         f"{spec.maximum}")
        if spec.choices is not None and val not in spec.choices:
            diags.append(f"parameter {key!r} = {val!r} not one of "
                         f"{spec.choices}")
    if cfg.sweep is not None:
        key = cfg.sweep.get("key")
        if key is None:
            diags.append("sweep section needs a 'key'")
        elif key not in schema:
            diags.append(f"sweep key {key!r} is not a parameter of "
                         f"{cfg.experiment}")
        elif schema[key].kind not in (float, int):
            diags.append(f"sweep key {key!r} is not numeric")
        for fld in ("from", "to", "steps"):
            if fld not in cfg.sweep:
                diags.append(f"sweep section missing {fld!r}")
            else:
                try:
                    float(cfg.sweep[fld])
                except ValueError:
                    diags.append(f"sweep field {fld!r} is not numeric")
        scale = cfg.sweep.get("scale", "linear")
        if scale not in ("linear", "log"):
            diags.append(f"sweep scale {scale!r} must be linear or log")
        elif scale == "log":
            try:
                if float(cfg.sweep["from"]) <= 0 or float(cfg.sweep["to"]) <= 0:
                    diags.append("log sweep endpoints must be positive")
            except (KeyError, ValueError):
                pass
        if exp.multi_row:
            diags.append(f"experiment {cfg.experiment} produces multiple "
                         "rows and cannot be swept")
    if cfg.output_format not in ("csv", "json"):
        diags.append(f"output format {cfg.output_format!r} must be csv "
                     "or json")
    return diags


def _typed_parameters(cfg: ExperimentConfig) -> dict:
    schema = EXPERIMENTS[cfg.experiment].params
    out = {}
    for key, spec in schema.items():
        if key in cfg.parameters:
            out[key] = _convert(cfg.parameters[key], spec.kind)
        else:
            out[key] = spec.default
    return out


def _sweep_values(sweep: dict) -> np.ndarray:
    lo, hi = float(sweep["from"]), float(sweep["to"])
    steps = int(float(sweep["steps"]))
    if sweep.get("scale", "linear") == "log":
        return np.logspace(np.log10(lo), np.log10(hi), steps)
    return np.linspace(lo, hi, steps)


def config_hash(cfg: ExperimentConfig) -> str:
    payload = json.dumps(
        {"experiment": cfg.experiment,
         "parameters": dict(sorted(cfg.parameters.items())),
         "sweep": (dict(sorted(cfg.sweep.items()))
                   if cfg.sweep is not None else None),
         "seed": cfg.seed},
        sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# --- result table and serialization -----------------------------------------------


@dataclass
class ResultTable:
    columns: Dict[str, list]
    metadata: Dict[str, object]

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise QThermError(f"ragged result columns: {lengths}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(table: ResultTable, stream) -> None:
    for key in ("version", "config_hash", "wall_time_s"):
        stream.write(f"# {key}: {_fmt(table.metadata[key])}\n")
    names = list(table.columns)
    stream.write(",".join(names) + "\n")
    n_rows = len(next(iter(table.columns.values()))) if names else 0
    for i in range(n_rows):
        stream.write(",".join(_fmt(table.columns[k][i]) for k in names)
                     + "\n")


def write_json(table: ResultTable, stream) -> None:
    def clean(v):
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (np.floating, float)):
            f = float(v)
            return None if np.isnan(f) else f
        return v

    payload = {
        "metadata": {k: clean(v) for k, v in table.metadata.items()},
        "columns": {k: [clean(v) for v in col]
                    for k, col in table.columns.items()},
    }
    json.dump(payload, stream, indent=2)
    stream.write("\n")


# --- run ---------------------------------------------------------------------


def run(cfg: ExperimentConfig) -> ResultTable:
    """Dispatch the config to its experiment; sweeps produce one row per
    sweep point, assembled in sweep order on a bounded worker pool."""
    start = time.perf_counter()
    exp = EXPERIMENTS[cfg.experiment]
    base = _typed_parameters(cfg)
    if cfg.seed is not None:
        np.random.seed(cfg.seed % 2**32)
    if cfg.sweep is None:
        row = exp.runner(base)
        if exp.multi_row:
            columns = {k: list(v) for k, v in row.items()}
        else:
            columns = {k: [v] for k, v in row.items()}
    else:
        key = cfg.sweep["key"]
        values = _sweep_values(cfg.sweep)
        kind = exp.params[key].kind
        points = [dict(base, **{key: kind(v)}) for v in values]
        env_threads = os.environ.get("QTHERM_THREADS")
        threads = (int(env_threads) if env_threads
                   else (cfg.threads or min(4, len(points))))
        threads = max(1, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(exp.runner, points))
        columns = {key: [p[key] for p in points]}
        for name in rows[0]:
            columns[name] = [r[name] for r in rows]
    metadata = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "wall_time_s": time.perf_counter() - start,
    }
    return ResultTable(columns=columns, metadata=metadata)


# --- command line ----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtherm",
        description=("Quantum thermal machine / metrology / battery "
                     "experiment runner. Units: hbar = k_B = 1; energies "
                     "and temperatures share one energy unit, times are "
                     "in its inverse."))
    sub = parser.add_subparsers(dest="command")
    names = sorted(EXPERIMENTS)
    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("experiment", choices=names)
    run_p.add_argument("--config", required=False)
    run_p.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="key=value")
    run_p.add_argument("--out")
    run_p.add_argument("--format", choices=("csv", "json"))
    run_p.add_argument("--threads", type=int)
    run_p.add_argument("--seed", type=int)
    val_p = sub.add_parser("validate", help="statically validate a config")
    val_p.add_argument("path")
    sub.add_parser("list", help="print the experiment catalog")
    return parser


def _print_catalog(stream) -> None:
    for name in sorted(EXPERIMENTS):
        exp = EXPERIMENTS[name]
        required = [k for k, s in exp.params.items() if s.required]
        optional = [f"{k}={_fmt(s.default)}" for k, s in exp.params.items()
                    if not s.required]
        parts = [name + ":", " ".join(required)]
        if optional:
            parts.append("[" + " ".join(optional) + "]")
        stream.write(" ".join(p for p in parts if p) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # allow `qtherm <experiment> ...` as shorthand for `qtherm run ...`
    if argv and argv[0] in EXPERIMENTS:
        argv = ["run"] + argv
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    if args.command == "list":
        _print_catalog(sys.stdout)
        return EXIT_OK

    if args.command == "validate":
        try:
            cfg = load_config(args.path)
        except (OSError, configparser.Error, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        diags = validate_config(cfg)
        for line in diags:
            print(line)
        return EXIT_OK if not diags else EXIT_CONFIG

    # run
    overrides = {}
    for item in args.sets:
        if "=" not in item:
            print(f"--set expects key=value, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    try:
        if args.config:
            cfg = load_config(args.config, experiment=args.experiment,
                              overrides=overrides)
        else:
            cfg = ExperimentConfig(experiment=args.experiment,
                                   parameters=overrides)
    except (OSError, configparser.Error, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        cfg.output_path = args.out
    if args.format:
        cfg.output_format = args.format
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    diags = validate_config(cfg)
    if diags:
        for line in diags:
            print(line, file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run(cfg)
    except QThermError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # internal invariant breach
        print(f"internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_INTERNAL
    writer = write_csv if cfg.output_format == "csv" else write_json
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            writer(table, fh)
    else:
        writer(table, sys.stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
