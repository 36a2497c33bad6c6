"""Command-line front end (``sbm``).

Subcommands: ``dynamics``, ``scan-amplitude``, ``scan-risetime``,
``estimate-g``, ``resonance-table``, ``convert-units`` and ``replay``
(re-run from a manifest). Each writes ``<name>.csv`` and
``<name>.manifest.json`` to ``--out-dir``, plus ``<name>.svg`` with ``--svg``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
failure (convergence, degenerate input, truncation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .. import __version__, analytic, experiments
from ..errors import (
    ConfigError,
    DomainError,
    InconsistentMeasurementError,
    NumericalError,
    TruncationError,
    UnsupportedRegimeError,
    ValidationError,
)
from ..model import (
    DEFAULT_T_END,
    DriveKind,
    ModelParams,
    NumericsConfig,
    params_from_dict,
    params_to_dict,
)
from . import records, svg
from .units import FLUX_QUBIT_PRESET, convert_units

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

SUBCOMMANDS = ("dynamics", "scan-amplitude", "scan-risetime", "estimate-g", "resonance-table", "convert-units")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_common(p: argparse.ArgumentParser, physics: bool = True) -> None:
    p.add_argument("--config", help="JSON configuration (model/drive/numerics/physical)")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--name", help="output file stem (default: subcommand name)")
    p.add_argument("--svg", action="store_true", help="also write an SVG plot")
    if physics:
        p.add_argument("--g", type=float, help="coupling g/omega")
        p.add_argument("--epsilon", type=float, help="atomic frequency epsilon/omega")
        p.add_argument("--n-max", type=int, help="Fock cutoff (default: suggested)")
        p.add_argument("--dt", type=float, help="sampling / step interval")
        p.add_argument("--t-end", type=float, help="final time")
        p.add_argument("--seed", type=int, help="root seed (env SBM_SEED)")
        p.add_argument("--initial", choices=experiments.INITIAL_SELECTORS, default="polaron")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbm", description="Driven spin-boson resonance toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dynamics", help="time trace of <sigma_z>, <sigma_x>")
    _add_common(p)
    p.add_argument("--drive", choices=[k.value for k in DriveKind])
    p.add_argument("--amplitude", type=float)
    p.add_argument("--rise-time", type=float)

    p = sub.add_parser("scan-amplitude", help="long-time mean M over drive amplitudes")
    _add_common(p)
    p.add_argument("--drive", choices=["photon", "atom"])
    p.add_argument("--min", type=float, default=0.0)
    p.add_argument("--max", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--t-l", type=float, default=DEFAULT_T_END)
    p.add_argument("--detector", choices=list(experiments.DETECTORS), default="magnitude",
                   help="peak profile: |M| or the lineshape matched filter")
    p.add_argument("--threshold", type=float, default=experiments.PEAK_THRESHOLD)
    p.add_argument("--verify", choices=["none", "corners", "all"], default="corners")
    p.add_argument("--jobs", type=int, help="worker processes (env SBM_JOBS)")

    p = sub.add_parser("scan-risetime", help="resonant M versus ramp rise time")
    _add_common(p)
    p.add_argument("--m", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--tc", type=float, nargs="+", default=[0.0, 5.0, 10.0, 20.0, 50.0])
    p.add_argument("--t-l", type=float, default=DEFAULT_T_END)

    p = sub.add_parser("estimate-g", help="coupling from resonance means")
    _add_common(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--i", type=int, default=1)
    p.add_argument("--t-l", type=float, default=DEFAULT_T_END)
    p.add_argument("--measured", type=float, nargs=2, metavar=("M_M", "M_MI"),
                   help="use these means instead of running the scan")
    p.add_argument("--jobs", type=int)

    p = sub.add_parser("resonance-table", help="analytic resonance positions and peak means")
    _add_common(p, physics=False)
    p.add_argument("--g", type=float)
    p.add_argument("--m-max", type=int, default=4)

    p = sub.add_parser("convert-units", help="physical timescales for the flux-qubit platform")
    _add_common(p, physics=False)
    p.add_argument("--omega-ghz", type=float, help="photon frequency f in GHz (omega = 2 pi f)")
    p.add_argument("--g-mhz", type=float, help="coupling g/2pi in MHz")
    p.add_argument("--kappa-mhz", type=float, help="decay rate kappa/2pi in MHz")
    p.add_argument("--t-l", type=float, default=DEFAULT_T_END)
    p.add_argument("--preset", choices=["flux-qubit", "none"], default="flux-qubit")

    p = sub.add_parser("replay", help="re-run from a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name")
    return parser


# -- configuration resolution -------------------------------------------------

def _resolve_config(ns: argparse.Namespace) -> dict:
    """Config document: file, then env, then explicit flags."""
    doc = {"model": {}, "drive": {}, "numerics": {}, "physical": {}}
    if ns.config:
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        params_from_dict(raw)  # strict key check
        for sec in doc:
            doc[sec].update(raw.get(sec, {}))
    if "SBM_SEED" in os.environ:
        try:
            doc["numerics"]["seed"] = int(os.environ["SBM_SEED"])
        except ValueError as exc:
            raise ConfigError(f"SBM_SEED must be an integer: {exc}") from exc
    flags = {
        ("model", "g"): getattr(ns, "g", None),
        ("model", "epsilon"): getattr(ns, "epsilon", None),
        ("drive", "kind"): getattr(ns, "drive", None),
        ("drive", "amplitude"): getattr(ns, "amplitude", None),
        ("drive", "rise_time"): getattr(ns, "rise_time", None),
        ("numerics", "n_max"): getattr(ns, "n_max", None),
        ("numerics", "dt"): getattr(ns, "dt", None),
        ("numerics", "t_end"): getattr(ns, "t_end", None),
        ("numerics", "seed"): getattr(ns, "seed", None),
        ("physical", "omega_ghz"): getattr(ns, "omega_ghz", None),
    }
    for (sec, key), val in flags.items():
        if val is not None:
            doc[sec][key] = val
    return doc


def _jobs(ns) -> int:
    if getattr(ns, "jobs", None):
        return ns.jobs
    try:
        return int(os.environ.get("SBM_JOBS", "1"))
    except ValueError as exc:
        raise ConfigError("SBM_JOBS must be an integer") from exc


def _options(ns: argparse.Namespace) -> dict:
    skip = {"command", "config", "out_dir", "name", "jobs", "g", "epsilon", "n_max", "dt", "t_end",
            "seed", "drive", "amplitude", "rise_time", "omega_ghz", "manifest"}
    return {k: v for k, v in sorted(vars(ns).items()) if k not in skip}


# -- subcommand handlers --------------------------------------------------------
# Each takes (config document, options, jobs) and returns (csv text, svg text or
# None, summary lines, exit status).

def _params(doc: dict, default_drive: str | None = None) -> tuple[ModelParams, NumericsConfig]:
    if "g" not in doc["model"]:
        raise UsageError("missing required option --g (or model.g in --config)")
    doc = json.loads(json.dumps(doc))
    if default_drive and "kind" not in doc["drive"]:
        doc["drive"]["kind"] = default_drive
    params, cfg, _ = params_from_dict(doc)
    return params, cfg


def _cmd_dynamics(doc, opts, jobs):
    params, cfg = _params(doc, "photon")
    series = experiments.dynamics_experiment(params, cfg, opts["initial"])
    text = records.timeseries_to_csv(series)
    plot = svg.line_plot(series.t, {"<sigma_z>": series.sigma_z}, "dynamics", "t (1/omega)", "<sigma_z>") \
        if opts["svg"] else None
    m = experiments.mean_over_time(series)
    return text, plot, [f"samples={len(series)} mean_sigma_z={m!r}"], EXIT_OK


def _cmd_scan_amplitude(doc, opts, jobs):
    params, cfg = _params(doc, "photon")
    if "dt" not in doc["numerics"]:
        cfg = replace(cfg, dt=experiments.SCAN_CONFIG.dt)
    grid = experiments.default_grid(opts["max"], opts["step"], opts["min"])
    scan = experiments.amplitude_scan(params, grid, opts["t_l"], opts["initial"], cfg, jobs=jobs,
                                      verify=opts["verify"], detector=opts["detector"],
                                      threshold=opts["threshold"])
    text = records.scan_to_csv(scan)
    plot = svg.line_plot(scan.grid, {"M": scan.means}, "long-time mean", "drive amplitude (omega)", "M") \
        if opts["svg"] else None
    lines = [f"peak amplitude={p.position!r} M={p.height!r} m={p.m}" for p in scan.peaks] or ["no peaks"]
    if scan.degraded:
        lines.append(f"DEGRADED: truncation check failed at {scan.failed_points}")
    return text, plot, lines, EXIT_NUMERIC if scan.degraded else EXIT_OK


def _cmd_scan_risetime(doc, opts, jobs):
    params, cfg = _params(doc, "photon")
    scan = experiments.risetime_scan(params, opts["m"], opts["tc"], opts["t_l"], cfg, opts["initial"])
    text = records.risetime_to_csv(scan)
    plot = svg.line_plot(scan.tc_grid, {f"|M| m={m}": v for m, v in scan.magnitudes.items()},
                         "resonant peak vs rise time", "Tc (1/omega)", "|M|") if opts["svg"] else None
    lines = [f"m={m} |M|={list(map(float, v))}" for m, v in scan.magnitudes.items()]
    return text, plot, lines, EXIT_OK


def _cmd_estimate_g(doc, opts, jobs):
    m, i = opts["m"], opts["i"]
    if opts["measured"] is not None:
        g_est = analytic.estimate_coupling(opts["measured"][0], opts["measured"][1], m, i)
        rows = [(m, i, opts["measured"][0], opts["measured"][1], g_est)]
        text = records.write_csv({"record": "coupling-estimate", "source": "measured"},
                                 ["m", "i", "M_m", "M_mi", "g_estimated"], rows)
        return text, None, [f"g/omega={g_est!r}"], EXIT_OK
    params, cfg = _params(doc, "photon")
    if "dt" not in doc["numerics"]:
        cfg = replace(cfg, dt=experiments.SCAN_CONFIG.dt)
    res = experiments.coupling_estimation_experiment(params, m, i, None, opts["t_l"], cfg, jobs=jobs)
    meta = {"record": "coupling-estimate", "source": "scan", "params": params_to_dict(params, cfg),
            "failed": res.failed, "reason": res.reason}
    text = records.write_csv(meta, ["m", "i", "M_m", "M_mi", "g_true", "g_estimated", "relative_error"],
                             [] if res.failed else
                             [(m, i, res.mean_m, res.mean_mi, res.g_true, res.g_estimated, res.relative_error)])
    if res.failed:
        return text, None, [f"experiment failed: {res.reason}"], EXIT_NUMERIC
    return text, None, [f"g/omega={res.g_estimated!r} relative_error={res.relative_error!r}"], EXIT_OK


def _cmd_resonance_table(doc, opts, jobs):
    g = doc["model"].get("g")
    if g is None:
        raise UsageError("missing required option --g")
    if g <= 0:
        raise ValidationError(["resonance table needs g > 0"])
    pref = math.exp(-2 * g * g)
    rows = []
    for m, pos in enumerate(analytic.resonance_positions(g, opts["m_max"]), start=1):
        jm = analytic.bessel_j(m, m)
        rows.append((m, pos, -pref * jm, jm, analytic.rabi_period(g, pos)))
    text = records.write_csv({"record": "resonance-table", "g": g},
                             ["m", "amplitude", "predicted_M", "J_m(m)", "rabi_period"], rows)
    plot = svg.line_plot([r[1] for r in rows], {"predicted M": [r[2] for r in rows]}, "resonance table",
                         "amplitude (omega)", "M") if opts["svg"] and len(rows) > 1 else None
    return text, plot, [f"m={r[0]} amplitude={r[1]!r} M={r[2]!r}" for r in rows], EXIT_OK


def _cmd_convert_units(doc, opts, jobs):
    preset = FLUX_QUBIT_PRESET if opts["preset"] == "flux-qubit" else {}
    f = doc["physical"].get("omega_ghz", preset.get("omega_ghz"))
    if f is None:
        raise UsageError("missing required option --omega-ghz")
    g_mhz = opts["g_mhz"] if opts["g_mhz"] is not None else preset.get("g_mhz")
    kappa = opts["kappa_mhz"] if opts["kappa_mhz"] is not None else preset.get("kappa_mhz")
    rep = convert_units(f, g_mhz, kappa, opts["t_l"], preset.get("quoted"))
    comps = rep.pop("comparisons")
    rows = [(k, v) for k, v in rep.items()]
    meta = {"record": "unit-conversion",
            "comparisons": [[c["quantity"], c["computed"], c["quoted"], c["agrees"]] for c in comps]}
    buf = records.write_csv(meta, ["quantity", "value"], rows)
    lines = [f"{k} = {v:.6g}" for k, v in rows]
    for c in comps:
        tag = "agrees with" if c["agrees"] else "DISAGREES with"
        lines.append(f"{c['quantity']}: computed {c['computed']:.4g} {tag} quoted {c['quoted']}")
    return buf, None, lines, EXIT_OK


HANDLERS = {
    "dynamics": _cmd_dynamics,
    "scan-amplitude": _cmd_scan_amplitude,
    "scan-risetime": _cmd_scan_risetime,
    "estimate-g": _cmd_estimate_g,
    "resonance-table": _cmd_resonance_table,
    "convert-units": _cmd_convert_units,
}


def _execute(command: str, doc: dict, opts: dict, jobs: int, out_dir: Path, name: str | None, out=sys.stdout) -> int:
    start = time.perf_counter()
    text, plot, lines, status = HANDLERS[command](doc, opts, jobs)
    name = name or command
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    csv_path.write_text(text)
    outputs = [str(csv_path)]
    if plot is not None:
        svg_path = out_dir / f"{name}.svg"
        svg_path.write_text(plot)
        outputs.append(str(svg_path))
    manifest = {
        "subcommand": command,
        "config": doc,
        "options": opts,
        "seed": doc.get("numerics", {}).get("seed", 0),
        "version": __version__,
        "outputs": outputs,
        "duration_s": time.perf_counter() - start,
    }
    (out_dir / f"{name}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for line in lines:
        print(line, file=out)
    return status


def run(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    """Execute one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(parser.format_usage() + "sbm: error: a subcommand is required")
        if ns.command == "replay":
            try:
                man = json.loads(Path(ns.manifest).read_text())
                command, doc, opts = man["subcommand"], man["config"], man["options"]
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise ConfigError(f"cannot read manifest {ns.manifest}: {exc}") from exc
            if command not in HANDLERS:
                raise ConfigError(f"manifest names unknown subcommand {command!r}")
            return _execute(command, doc, opts, _jobs(ns), Path(ns.out_dir), ns.name, out)
        doc = _resolve_config(ns)
        return _execute(ns.command, doc, _options(ns), _jobs(ns), Path(ns.out_dir), ns.name, out)
    except UsageError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except (ValidationError, ConfigError, InconsistentMeasurementError, DomainError, UnsupportedRegimeError) as exc:
        print(f"sbm: validation failed: {exc}", file=err)
        return EXIT_VALIDATION
    except (NumericalError, TruncationError) as exc:
        print(f"sbm: numerical failure: {exc}", file=err)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run(sys.argv[1:]))
