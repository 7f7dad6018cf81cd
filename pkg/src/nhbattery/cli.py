"""Command-line entry point: ``nhbattery <command> [options]``.

Commands
--------
eigen      eigenfrequencies over a (kappa, gamma) point or grid
simulate   one time-domain run of the coupled-mode equations
sweep      E_max / E_s / P_max tables over distance and loss
step       distance-step transient with per-segment settling reports
circuit    transient LC-tank simulation and its coupled-mode cross-check
coupling   coupling rate kappa(d) for a coil geometry

Values come from built-in defaults, then ``--config FILE`` (TOML), then
command-line flags.  Exit codes: 0 success, 2 usage error, 3 numerical
failure, 4 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import analytic, circuit, config, coupling, dynamics, scenarios, spectral
from .core import AmplitudeState, LinearGain, SaturableGain, SystemParams

OUTPUT_DIR_ENV = "NHBATTERY_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4

EIGEN_HEADER = ["kappa", "gamma", "region", "re_w1", "im_w1", "re_w2", "im_w2",
                "re_w3", "im_w3", "g_sat", "g_w1", "g_w2", "g_w3"]


class UsageError(Exception):
    pass


fmt = scenarios.fmt_float


def parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` to an inclusive linspace, or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            n = int(parts[2])
            if n < 1:
                raise ValueError
            return np.linspace(float(parts[0]), float(parts[1]), n)
    except ValueError:
        pass
    raise UsageError(f"bad range {text!r}; expected start:stop:count")


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, complex):
        return {"re": jsonable(x.real), "im": jsonable(x.imag)}
    if x is None or isinstance(x, str):
        return x
    return str(x)


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# -- argument handling -------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML file with per-module sections")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--output", "-o", help=f"output file (relative paths resolve against ${OUTPUT_DIR_ENV})")


def _family(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--linear", dest="family", action="store_const", const="linear")
    g.add_argument("--nonlinear", dest="family", action="store_const", const="nonlinear")


def _system(p, kappa=True):
    if kappa:
        p.add_argument("--kappa", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--g1", type=float)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--omega0", type=float)


def _integration(p):
    p.add_argument("--t-end", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--max-step", type=float)
    p.add_argument("--stride", type=float, dest="record_stride")


def _coil(p):
    p.add_argument("--coil-radius", type=float, dest="radius")
    p.add_argument("--coil-turns", type=int, dest="turns")
    p.add_argument("--coil-pitch", type=float, dest="axial_pitch")
    p.add_argument("--wire-radius", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhbattery", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="eigenfrequencies and saturated gain")
    _common(p)
    _family(p)
    _system(p)
    p.add_argument("--kappa-range")
    p.add_argument("--gamma-range")

    p = sub.add_parser("simulate", help="time-domain coupled-mode run")
    _common(p)
    _family(p)
    _system(p)
    p.add_argument("--g", type=float, help="linear gain (defaults to gamma)")
    p.add_argument("--omega-a", type=float)
    p.add_argument("--omega-b", type=float)
    p.add_argument("--psi-a0", type=complex, default=None)
    p.add_argument("--psi-b0", type=complex, default=None)
    p.add_argument("--analytic", action="store_true", help="closed forms (balanced linear dimer)")
    _integration(p)

    p = sub.add_parser("sweep", help="E_max, E_s and P_max over (d, gamma)")
    _common(p)
    _family(p)
    _system(p, kappa=False)
    p.add_argument("--gamma-range")
    p.add_argument("--d-range")
    p.add_argument("--workers", type=int)
    _integration(p)
    _coil(p)

    p = sub.add_parser("step", help="distance-step transient")
    _common(p)
    _system(p, kappa=False)
    p.add_argument("--schedule", help="TOML file with a [schedule] section (may also hold other sections)")
    p.add_argument("--segments", help="t0:d0,t1:d1,...")
    p.add_argument("--window", type=float)
    p.add_argument("--threshold", type=float)
    _integration(p)
    _coil(p)

    p = sub.add_parser("circuit", help="LC-tank transient and cross-validation")
    _common(p)
    p.add_argument("--preset", help="shipped recipe: " + ", ".join(config.preset_names()))
    p.add_argument("--r-b", type=float)
    p.add_argument("--m-over-l", type=float)
    p.add_argument("--rail-voltage", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt-max", type=float)
    p.add_argument("--report", help="also write the cross-validation JSON here")
    p.add_argument("--no-validate", action="store_true",
                   help="do not fail when the cross-validation budget is exceeded")

    p = sub.add_parser("coupling", help="coupling curve kappa(d)")
    _common(p)
    p.add_argument("--d-range")
    p.add_argument("--omega0", type=float)
    _coil(p)
    return parser


def _merge(section: Dict[str, Any], args, names: Sequence[str], rename=None) -> Dict[str, Any]:
    """Overlay non-None flag values on a config section."""
    out = dict(section)
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            out[(rename or {}).get(name, name)] = val
    return out


def _load(args) -> Dict[str, Dict[str, Any]]:
    return config.load_config(args.config) if args.config else {}


def _output_format(args, cfg, default="csv") -> str:
    return args.format or cfg.get("output", {}).get("format", default)


def _write(text: str, args, cfg, default_name: str):
    path = args.output or cfg.get("output", {}).get("path")
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if path is None and out_dir is None:
        sys.stdout.write(text)
        return
    target = Path(path) if path else Path(default_name)
    if out_dir and not target.is_absolute():
        target = Path(out_dir) / target
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def _integration_cfg(args, cfg, **defaults) -> dynamics.IntegrationConfig:
    sec = _merge(cfg.get("integration", {}), args,
                 ["t_end", "rel_tol", "abs_tol", "max_step", "record_stride"])
    return config.integration_from(sec, **defaults)


def _coil_cfg(args, cfg) -> coupling.CoilGeometry:
    return config.coil_from(_merge(cfg.get("coil", {}), args,
                                   ["radius", "turns", "axial_pitch", "wire_radius"]))


def _system_section(args, cfg):
    sec = _merge(cfg.get("system", {}), args,
                 ["kappa", "gamma", "g1", "gamma1", "omega0", "g", "omega_a", "omega_b"])
    if getattr(args, "family", None):
        sec["family"] = args.family
    return sec


def _saturable(sec) -> SaturableGain:
    return SaturableGain(sec.get("g1", 3.0), sec.get("gamma1", 0.05))


# -- commands ----------------------------------------------------------------

def _eigen_row(kappa, gamma, es: spectral.EigenSet):
    freqs = list(es.frequencies) + [None] * (3 - len(es.frequencies))
    gains = list(es.mode_gains) + [None] * (3 - len(es.mode_gains))
    row = [kappa, gamma, str(es.region)]
    for w in freqs:
        row += [None, None] if w is None else [w.real, w.imag]
    return row + [es.g_sat] + gains


def cmd_eigen(args) -> int:
    cfg = _load(args)
    sec = _system_section(args, cfg)
    sweep = cfg.get("sweep", {})
    kappas = parse_range(args.kappa_range or sweep["kappa_range"]) \
        if (args.kappa_range or "kappa_range" in sweep) else None
    if kappas is None:
        if "kappa" not in sec:
            raise UsageError("eigen needs --kappa or --kappa-range")
        kappas = np.array([sec["kappa"]])
    gamma_spec = args.gamma_range or sweep.get("gamma_range")
    if gamma_spec is not None:
        gammas = parse_range(gamma_spec)
    elif "gamma" in sec:
        gammas = np.array([sec["gamma"]])
    else:
        raise UsageError("eigen needs --gamma or --gamma-range")
    nonlinear = sec.get("family", "linear") == "nonlinear"
    w0 = sec.get("omega0", 1.0)
    rows = []
    for k in kappas:
        for g in gammas:
            k, g = float(k), float(g)
            if nonlinear:
                es = spectral.nonlinear_eigenfrequencies(
                    SystemParams(w0, w0, k, g, _saturable(sec)))
            else:
                es = spectral.linear_eigenfrequencies(SystemParams(w0, w0, k, g, LinearGain(g)))
            rows.append(_eigen_row(k, g, es))
    if _output_format(args, cfg) == "json":
        text = dump_json([dict(zip(EIGEN_HEADER, r)) for r in rows])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EIGEN_HEADER)
        for r in rows:
            w.writerow([x if isinstance(x, str) else fmt(x) for x in r])
        text = buf.getvalue()
    _write(text, args, cfg, "eigen." + _output_format(args, cfg))
    return EXIT_OK


def parse_eigen_csv(text: str) -> List[Dict[str, Any]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != EIGEN_HEADER:
        raise ValueError(f"expected header {','.join(EIGEN_HEADER)}")
    out = []
    for r in rows[1:]:
        if r:
            out.append({k: (v if k == "region" else scenarios._parse_float(v))
                        for k, v in zip(EIGEN_HEADER, r)})
    return out


def _analytic_trajectory(params: SystemParams, cfg: dynamics.IntegrationConfig):
    if not (isinstance(params.gain, LinearGain) and params.gain.g == params.gamma
            and params.is_resonant):
        raise UsageError("--analytic needs the balanced resonant linear dimer (g == gamma)")
    n = int(math.floor(cfg.t_end / cfg.record_stride + 1e-9))
    t = np.append(np.arange(n + 1) * cfg.record_stride, [] if n * cfg.record_stride >= cfg.t_end
                  else [cfg.t_end])
    sol = analytic.LinearSolution(params.kappa, params.gamma, params.omega_a)
    return dynamics.Trajectory(t, analytic.psi_a_closed_form(sol, t),
                               analytic.psi_b_closed_form(sol, t),
                               np.full_like(t, params.gamma), np.full_like(t, params.kappa),
                               params.omega_a, params.omega_b)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    sec = _system_section(args, cfg)
    nonlinear = sec.get("family", "linear") == "nonlinear"
    if args.analytic and nonlinear:
        raise UsageError("--analytic has no closed form for the nonlinear gain")
    w0 = sec.get("omega0", 1.0)
    kappa = sec.get("kappa", 0.5)
    gamma = sec.get("gamma", 0.3)
    gain = _saturable(sec) if nonlinear else LinearGain(sec.get("g", gamma))
    params = SystemParams(sec.get("omega_a", w0), sec.get("omega_b", w0), kappa, gamma, gain)
    icfg = _integration_cfg(args, cfg)
    if args.analytic:
        traj = _analytic_trajectory(params, icfg)
    else:
        psi0 = AmplitudeState(
            1.0 if args.psi_a0 is None else args.psi_a0,
            0.0 if args.psi_b0 is None else args.psi_b0)
        traj = dynamics.integrate(params, psi0, icfg)
    if _output_format(args, cfg) == "json":
        body = {name: col for name, col in zip(dynamics.TRAJECTORY_HEADER, (
            traj.t, traj.psi_a.real, traj.psi_a.imag, traj.psi_b.real, traj.psi_b.imag,
            traj.g, traj.e, traj.e_a, traj.p))}
        if nonlinear and traj.t[-1] > 40:
            body["steady_state"] = dynamics.detect_steady_state(traj).__dict__
        text = dump_json(body)
    else:
        text = traj.to_csv()
    _write(text, args, cfg, "simulate." + _output_format(args, cfg))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    sec = _system_section(args, cfg)
    sweep = _merge(cfg.get("sweep", {}), args, ["gamma_range", "d_range", "workers"])
    nonlinear = sec.get("family", "linear") == "nonlinear"
    base = scenarios.default_grid(nonlinear)
    ds = parse_range(sweep["d_range"]) if "d_range" in sweep else base.d_values
    gs = parse_range(sweep["gamma_range"]) if "gamma_range" in sweep else base.gamma_values
    grid = scenarios.SweepGrid(ds, gs, _saturable(sec) if nonlinear else None)
    icfg = _integration_cfg(args, cfg, t_end=200.0 if nonlinear else 20.0)
    det = cfg.get("detector", {})
    res = scenarios.run_sweep(grid, _coil_cfg(args, cfg), icfg, sec.get("omega0", 1.0),
                              window=det.get("window", 20.0),
                              threshold=det.get("threshold", 1e-3),
                              workers=int(sweep.get("workers", 1)))
    if _output_format(args, cfg) == "json":
        text = dump_json({
            "rows": [dict(zip(scenarios.SWEEP_HEADER, (d, g, str(r), em, es, pm)))
                     for d, g, r, em, es, pm in res.rows()],
            "arc": [{"gamma": g, "d_m": d} for g, d in res.arc],
            "diagnostics": res.diagnostics,
        })
    else:
        text = res.to_csv()
    if res.diagnostics:
        print(f"warning: {len(res.diagnostics)} of {len(gs) * len(ds)} cells flagged "
              f"(first: {res.diagnostics[0]})", file=sys.stderr)
    _write(text, args, cfg, "sweep." + _output_format(args, cfg))
    return EXIT_OK


def _parse_segments(text: str):
    try:
        return tuple(tuple(float(x) for x in seg.split(":")) for seg in text.split(","))
    except ValueError:
        raise UsageError(f"bad --segments {text!r}; expected t0:d0,t1:d1,...")


def cmd_step(args) -> int:
    cfg = _load(args)
    if args.schedule:
        extra = config.load_config(args.schedule)
        for name, body in extra.items():
            cfg[name] = {**body, **cfg.get(name, {})} if name != "schedule" else body
    sec = _system_section(args, cfg)
    if args.segments:
        segments = _parse_segments(args.segments)
    elif "segments" in cfg.get("schedule", {}):
        segments = cfg["schedule"]["segments"]
    else:
        raise UsageError("step needs --schedule or --segments")
    schedule = scenarios.StepSchedule(tuple(tuple(s) for s in segments))
    w0 = sec.get("omega0", 1.0)
    params = SystemParams(w0, w0, 0.0, sec.get("gamma", 0.04), _saturable(sec))
    icfg = _integration_cfg(args, cfg, t_end=schedule.segments[-1][0] + 100.0)
    det = _merge(cfg.get("detector", {}), args, ["window", "threshold"])
    res = scenarios.run_step_response(schedule, _coil_cfg(args, cfg), params, icfg,
                                      det.get("window", 20.0), det.get("threshold", 1e-3))
    if _output_format(args, cfg, default="json") == "json":
        segs = []
        for (t0, d), rep, ts in zip(schedule.segments, res.reports, res.settle_times()):
            segs.append({"t_start": t0, "d_m": d,
                         "kappa": coupling.kappa_of_distance(_coil_cfg(args, cfg), d, w0),
                         "converged": rep.converged, "t_settle": rep.t_settle,
                         "settle_time": ts, "e_steady": rep.e_steady,
                         "g_measured": rep.g_measured, "mode_frequency": rep.mode_frequency})
        text = dump_json({"gamma": params.gamma, "t_end": icfg.t_end, "segments": segs})
        fmt_name = "json"
    else:
        text = res.to_csv()
        fmt_name = "csv"
    _write(text, args, cfg, "step." + fmt_name)
    return EXIT_OK


def cmd_circuit(args) -> int:
    if args.preset and args.config:
        raise UsageError("give either --preset or --config, not both")
    cfg = config.load_preset(args.preset) if args.preset else _load(args)
    circ = _merge(cfg.get("circuit", {}), args,
                  ["r_b", "m_over_l", "rail_voltage", "t_end", "dt_max"])
    cfg = {**cfg, "circuit": circ}
    config.check_keys(cfg)
    recipe = config.circuit_from(cfg)
    wave = circuit.simulate_circuit(recipe.params, recipe.initial, recipe.t_end, recipe.dt_max)
    report = circuit.crossvalidate(recipe.params, recipe.t_end, recipe.initial, waveform=wave)
    report_text = dump_json(report)
    if _output_format(args, cfg) == "json":
        text = report_text
    else:
        text = wave.to_csv()
    _write(text, args, cfg, "circuit." + _output_format(args, cfg))
    if args.report:
        Path(args.report).write_text(report_text)
    if not report["passed"] and not args.no_validate:
        print("cross-validation outside budget:", json.dumps(jsonable(report["metrics"]),
                                                            sort_keys=True), file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_coupling(args) -> int:
    cfg = _load(args)
    geom = _coil_cfg(args, cfg)
    sweep = _merge(cfg.get("sweep", {}), args, ["d_range"])
    ds = parse_range(sweep.get("d_range", "0.2:1.2:21"))
    w0 = args.omega0 if args.omega0 is not None else cfg.get("system", {}).get("omega0", 1.0)
    curve = coupling.coupling_curve(geom, ds, w0)
    if _output_format(args, cfg) == "json":
        text = dump_json({"d_m": curve.distances,
                          "kappa_per_omega0": [k / w0 for k in curve.kappas],
                          "self_inductance_H": coupling.self_inductance(geom)})
    else:
        text = curve.to_csv()
    _write(text, args, cfg, "coupling." + _output_format(args, cfg))
    return EXIT_OK


COMMANDS = {"eigen": cmd_eigen, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "step": cmd_step, "circuit": cmd_circuit, "coupling": cmd_coupling}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dynamics.IntegrationError, circuit.CircuitSimulationError,
            dynamics.MeasurementUnavailable, spectral.NoCrossing, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
