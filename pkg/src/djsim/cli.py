"""Command-line front end.

    djsim run <experiment> [--config FILE] [--out CSV] [--json FILE]
                           [--plot SVG] [--jobs N] [--schedule FILE]
    djsim verify
    djsim --about

Experiments: stark, pulse, fock, rabi, thermal, dj, gates-check.

Config files are flat ``key = value`` text with ``#`` comments.  Unknown keys
are rejected.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure (unitarity or truncation).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, experiments, gates, model, qcore, verify
from .djrunner import run_dj
from .errors import ConfigError, NumericalFailure, TruncationFailure
from .gates import Analytic, FockInit, Oracle, Physical, ThermalInit
from .model import SolverConstraints
from .propagator import IntegratorSettings

ABOUT = f"""djsim {__version__}
Simulator for a Deutsch-Jozsa scheme on two driven two-level atoms coupled to
a single cavity mode.  All inputs are dimensionless, in units of the
atom-cavity coupling g; a typical microwave-cavity realization has
g = 2 pi x 25 kHz, which only fixes the absolute timescale (interaction
windows of order 1e-5 s against a photon lifetime of about 1e-3 s and an
atomic radiative lifetime of about 3e-2 s) and never changes a fidelity.
"""

_INTEGRATOR_KEYS = ("steps_per_radian", "unitarity_tol", "leakage_tol")

_EXPERIMENT_KEYS = {
    "stark": {"delta_over_g_list", "omega_ratio", "fock_cutoff", *_INTEGRATOR_KEYS},
    "pulse": {
        "eps_list", "fock_n", "delta_over_g", "omega_over_delta_min",
        "fock_cutoff", *_INTEGRATOR_KEYS,
    },
    "fock": {
        "n_list", "delta_over_g", "omega_over_delta_min", "fock_cutoff",
        *_INTEGRATOR_KEYS,
    },
    "rabi": {
        "ratio", "delta_over_g", "omega_ratio", "fock_cutoff", *_INTEGRATOR_KEYS,
    },
    "thermal": {
        "nbar", "oracle", "delta_over_g", "omega_over_delta_min", "fock_cutoff",
        *_INTEGRATOR_KEYS,
    },
    "dj": {
        "oracle", "mode", "nbar", "fock_n", "delta_over_g",
        "omega_over_delta_min", "fock_cutoff", *_INTEGRATOR_KEYS,
    },
    "gates-check": set(),
}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; later keys override earlier ones."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def serialize_config(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def _as_float(cfg, key, default):
    try:
        return float(cfg[key]) if key in cfg else default
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc


def _as_int(cfg, key, default):
    try:
        return int(cfg[key]) if key in cfg else default
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc


def _as_float_list(cfg, key, default):
    if key not in cfg:
        return default
    try:
        return tuple(float(x) for x in cfg[key].split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc


def _settings(cfg) -> IntegratorSettings:
    try:
        return IntegratorSettings(
            steps_per_radian=_as_float(cfg, "steps_per_radian", 20.0),
            unitarity_tol=_as_float(cfg, "unitarity_tol", 1e-6),
            leakage_tol=_as_float(cfg, "leakage_tol", 1e-6),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _oracle(cfg, default="F3") -> Oracle:
    name = cfg.get("oracle", default).upper()
    try:
        return Oracle[name]
    except KeyError as exc:
        raise ConfigError(f"key 'oracle': unknown oracle {name!r} (use F1..F4)") from exc


def _validate_keys(experiment: str, cfg: dict) -> None:
    allowed = _EXPERIMENT_KEYS[experiment]
    for key in cfg:
        if key not in allowed:
            raise ConfigError(f"key {key!r} is not valid for experiment {experiment!r}")


def _run_experiment(experiment: str, cfg: dict, jobs: int):
    settings = _settings(cfg)
    if experiment == "stark":
        return experiments.stark_sweep(
            delta_over_g=_as_float_list(cfg, "delta_over_g_list", experiments.DEFAULT_STARK_DELTAS),
            omega_ratio=_as_float(cfg, "omega_ratio", 20.0),
            fock_cutoff=_as_int(cfg, "fock_cutoff", 24),
            settings=settings,
            jobs=jobs,
        )
    if experiment == "pulse":
        return experiments.pulse_error_sweep(
            eps=_as_float_list(cfg, "eps_list", (0.0, 0.03, 0.05, 0.10)),
            fock_n=_as_int(cfg, "fock_n", 5),
            delta_over_g=_as_float(cfg, "delta_over_g", 20.0),
            omega_over_delta_min=_as_float(cfg, "omega_over_delta_min", 20.0),
            fock_cutoff=_as_int(cfg, "fock_cutoff", 20),
            settings=settings,
            jobs=jobs,
        )
    if experiment == "fock":
        n_list = _as_float_list(cfg, "n_list", tuple(range(11)))
        return experiments.fock_sweep(
            n_values=tuple(int(n) for n in n_list),
            delta_over_g=_as_float(cfg, "delta_over_g", 20.0),
            omega_over_delta_min=_as_float(cfg, "omega_over_delta_min", 20.0),
            fock_cutoff=_as_int(cfg, "fock_cutoff", 25),
            settings=settings,
            jobs=jobs,
        )
    if experiment == "rabi":
        report, f_nom, f_pert = experiments.rabi_fluctuation(
            delta_omega_ratio=_as_float(cfg, "ratio", 0.01),
            delta_over_g=_as_float(cfg, "delta_over_g", math.sqrt(2.0)),
            omega_ratio=_as_float(cfg, "omega_ratio", 20.0),
            fock_cutoff=_as_int(cfg, "fock_cutoff", 24),
            settings=settings,
        )
        print(f"f_nominal={f_nom:.12g} f_perturbed={f_pert:.12g} drop={f_nom - f_pert:.12g}")
        return report
    if experiment == "thermal":
        oracle = cfg.get("oracle", "all")
        which = list(Oracle) if oracle.lower() == "all" else [_oracle(cfg)]
        records = []
        for orc in which:
            report = experiments.thermal_dj(
                nbar=_as_float(cfg, "nbar", 0.5),
                oracle=orc,
                delta_over_g=_as_float(cfg, "delta_over_g", 20.0),
                omega_over_delta_min=_as_float(cfg, "omega_over_delta_min", 20.0),
                fock_cutoff=_as_int(cfg, "fock_cutoff", None),
                settings=settings,
            )
            records.extend(report.records)
        return experiments.Report(tuple(records))
    if experiment == "dj":
        oracle = _oracle(cfg)
        if cfg.get("mode", "analytic").lower() == "analytic":
            mode = Analytic()
        else:
            if "nbar" in cfg:
                cavity = ThermalInit(_as_float(cfg, "nbar", 0.5))
                cutoff = _as_int(
                    cfg, "fock_cutoff", qcore.min_cutoff_for_tail(cavity.nbar, 1e-6) + 10
                )
            else:
                cavity = FockInit(_as_int(cfg, "fock_n", 0))
                cutoff = _as_int(cfg, "fock_cutoff", cavity.n + 15)
            mode = Physical(cavity, cutoff, settings)
        constraints = SolverConstraints(
            omega_over_delta_min=_as_float(cfg, "omega_over_delta_min", 20.0),
            delta_over_g=_as_float(cfg, "delta_over_g", None),
        )
        result = run_dj(oracle, mode, constraints)
        print(
            f"oracle={oracle.name} classification={result.classification.capitalize()} "
            f"p0={result.p0:.12g} p1={result.p1:.12g} "
            f"state_fidelity={result.state_fidelity:.12g}"
        )
        record = experiments.FidelityRecord(
            "dj", f"p_correct_{oracle.name}", 0.0, result.p_correct(oracle), 0, 0, 0.0
        )
        return experiments.Report((record,))
    raise ConfigError(f"unknown experiment {experiment!r}")


def _gates_check(schedule_path: str | None) -> int:
    ok = True
    cp = gates.controlled_phase_schedule().analytic_matrix()
    cp_defect = qcore.match_up_to_global_phase(cp, model.controlled_phase_target())
    print(f"{'PASS' if cp_defect < 1e-12 else 'FAIL'}  controlled-phase truth table "
          f"(defect {cp_defect:.2e})")
    ok &= cp_defect < 1e-12
    cnot = gates.cnot_schedule().analytic_matrix()
    ideal = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    cnot_defect = qcore.match_up_to_global_phase(cnot, ideal)
    print(f"{'PASS' if cnot_defect < 1e-12 else 'FAIL'}  CNOT truth table "
          f"(defect {cnot_defect:.2e})")
    ok &= cnot_defect < 1e-12
    if schedule_path is not None:
        text = Path(schedule_path).read_text()
        sched = gates.schedule_from_text(text)
        u = sched.analytic_matrix()
        unitary_defect = float(np.abs(u @ u.conjugate().transpose() - np.eye(4)).max())
        print(f"schedule: {len(sched)} steps, unitarity defect {unitary_defect:.2e}")
        with np.printoptions(precision=6, suppress=True):
            print(u)
        ok &= unitary_defect < 1e-9
    return 0 if ok else 1


def write_svg_plot(report, path: str) -> None:
    """Minimal self-contained SVG polyline of fidelity vs parameter."""
    recs = list(report.records)
    if not recs:
        raise ConfigError("nothing to plot: empty report")
    xs = [r.param_value for r in recs]
    ys = [r.fidelity for r in recs]
    w, h, margin = 640, 420, 60
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1e-12

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (w - 2 * margin)

    def sy(y):
        return h - margin - (y - y0) / (y1 - y0) * (h - 2 * margin)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    name = recs[0].experiment
    param = recs[0].param_name
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{margin}" y1="{h - margin}" x2="{w - margin}" y2="{h - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{h - margin}" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>',
    ]
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>')
    parts.append(
        f'<text x="{w / 2:.0f}" y="{h - 15}" text-anchor="middle" font-size="14">{param}</text>'
    )
    parts.append(
        f'<text x="20" y="{h / 2:.0f}" font-size="14" '
        f'transform="rotate(-90 20 {h / 2:.0f})" text-anchor="middle">fidelity</text>'
    )
    parts.append(
        f'<text x="{w / 2:.0f}" y="25" text-anchor="middle" font-size="15">{name}</text>'
    )
    parts.append(
        f'<text x="{margin - 8}" y="{h - margin + 4}" text-anchor="end" font-size="11">{y0:.6g}</text>'
    )
    parts.append(
        f'<text x="{margin - 8}" y="{margin + 4}" text-anchor="end" font-size="11">{y1:.6g}</text>'
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="djsim", description=__doc__.splitlines()[0])
    parser.add_argument("--about", action="store_true", help="print scope and unit notes")
    sub = parser.add_subparsers(dest="command")
    runp = sub.add_parser("run", help="run an experiment")
    runp.add_argument("experiment", choices=sorted(_EXPERIMENT_KEYS))
    runp.add_argument("--config", help="flat key = value configuration file")
    runp.add_argument("--out", help="CSV output path")
    runp.add_argument("--json", dest="json_out", help="JSON output path")
    runp.add_argument("--plot", help="SVG output path")
    runp.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    runp.add_argument("--schedule", help="schedule text file (gates-check only)")
    sub.add_parser("verify", help="run the invariant/oracle check table")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.about:
        print(ABOUT)
        return 0
    if args.command == "verify":
        return 0 if verify.run_all() else 1
    if args.command != "run":
        _build_parser().print_help()
        return 0
    try:
        cfg: dict = {}
        if args.config is not None:
            path = Path(args.config)
            if not path.is_file():
                raise ConfigError(f"config file not found: {args.config}")
            cfg = parse_config_text(path.read_text())
        if args.experiment == "gates-check":
            return _gates_check(args.schedule)
        _validate_keys(args.experiment, cfg)
        report = _run_experiment(args.experiment, cfg, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, TruncationFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if args.out:
        Path(args.out).write_text(report.to_csv_text())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json_text())
    if args.plot:
        write_svg_plot(report, args.plot)
    if not (args.out or args.json_out or args.plot):
        sys.stdout.write(report.to_csv_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
