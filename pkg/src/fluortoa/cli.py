"""Command-line interface: ``fluortoa <subcommand> [--config PATH] [--out DIR] ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical-validity error
(boundary leak, unfinished run, formula domain), 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .arrival import mean_time
from .config import McSettings, SimulationConfig, default_config, parse_config
from .errors import FluorToaError
from .outputs import render_svg, write_csv, write_json
from .runner import comparison_metrics, kijowski_curve, montecarlo, simulate
from .units import from_internal

log = logging.getLogger("fluortoa")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _meta(cfg: SimulationConfig) -> dict:
    return {"code_version": __version__, "kernel_backend": kernels.BACKEND,
            "parameters": cfg.parameters()}


def _write_timeseries(out: Path, res) -> None:
    write_csv(out / "timeseries.csv", ["t_us", "norm", "p2", "pi_op"],
              [res.times, res.norm, res.p2, res.config.gamma * res.p2])


def _simulation_metrics(res) -> dict:
    op = res.operational
    metrics = {
        "detected_fraction": res.detected,
        "rejected_fraction": res.rejected,
        "final_norm": float(res.norm[-1]),
        "operational_mass": op.total_mass,
        "max_edge_density": max(r.edge_leak for r in res.records),
    }
    if op.total_mass > 0:
        metrics["mean_time_us"] = mean_time(op.normalize())
    return metrics


def cmd_simulate(cfg: SimulationConfig, out: Path, threads: int = 1) -> dict:
    res = simulate(cfg)
    out.mkdir(parents=True, exist_ok=True)
    _write_timeseries(out, res)
    metrics = _simulation_metrics(res) | _meta(cfg)
    write_json(out / "metrics.json", metrics)
    return metrics


def cmd_kijowski(cfg: SimulationConfig, out: Path, threads: int = 1) -> dict:
    kij = kijowski_curve(cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "kijowski.csv", ["t_us", "pi_k"], [kij.times, kij.density])
    return {"kijowski_mass": kij.total_mass}


def cmd_montecarlo(cfg: SimulationConfig, out: Path, threads: int = 1) -> dict:
    run = montecarlo(cfg, threads=threads)
    res = run.result
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "histogram.csv",
              ["bin_lo_us", "bin_hi_us", "count", "density", "stderr"],
              [res.edges[:-1], res.edges[1:], res.counts, res.distribution.density,
               res.distribution.stderr])
    summary = {
        "n_traj": res.n_traj,
        "seed": cfg.mc.seed,
        "survived_fraction": res.survived_fraction,
        "survived_stderr": res.survived_stderr(),
        "deterministic_final_norm": float(run.norm[-1]),
        "ks_distance": run.ks,
        "ks_threshold_1pct": 1.63 / np.sqrt(res.n_traj),
    } | _meta(cfg)
    write_json(out / "montecarlo.json", summary)
    return summary


def _compare_into(cfg: SimulationConfig, out: Path) -> dict:
    res = simulate(cfg)
    kij = kijowski_curve(cfg, res.times)
    out.mkdir(parents=True, exist_ok=True)
    _write_timeseries(out, res)
    write_csv(out / "kijowski.csv", ["t_us", "pi_k"], [kij.times, kij.density])
    metrics = comparison_metrics(res.operational, kij)
    metrics |= {"detected_fraction": res.detected, "rejected_fraction": res.rejected}
    op_n, k_n = res.operational.normalize(), kij.normalize()
    svg = render_svg([("Kijowski", k_n.times, k_n.density),
                      (f"operational, Ω₀ = {cfg.rabi.label}", op_n.times, op_n.density)])
    (out / "compare.svg").write_text(svg)
    write_json(out / "compare.json", metrics | _meta(cfg))
    return metrics


def cmd_compare(cfg: SimulationConfig, out: Path, threads: int = 1) -> dict:
    return _compare_into(cfg, out)


class _SweepFailed(FluorToaError):
    def __init__(self, message, code):
        super().__init__(message)
        self.exit_code = code


def _sweep_point(args):
    cfg, out = args
    try:
        return {"status": "ok", **_compare_into(cfg, out)}
    except FluorToaError as exc:
        return {"status": "failed", "error": str(exc), "exit_code": exc.exit_code}


def cmd_sweep(cfg: SimulationConfig, out: Path, threads: int = 1) -> dict:
    sweep = cfg.sweep
    if sweep is None:
        sweep_points = [(cfg.rabi, cfg.packets[0].v_mean)]
    else:
        sweep_points = [(r, v) for r in sweep.omega0 for v in sweep.velocities]
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for rabi, v in sweep_points:
        v_cm = from_internal(v, "cm/s")
        name = f"omega0_{rabi.label}_v_{v_cm:g}cm_s"
        jobs.append((cfg.with_point(rabi, v), out / name))
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    rows = []
    manifest = {"points": [], **_meta(cfg)}
    for (pcfg, pdir), (rabi, v), res in zip(jobs, sweep_points, results):
        row = {"directory": pdir.name, "omega0": rabi.label,
               "omega0_over_gamma": rabi.over_gamma(cfg.gamma),
               "v_cm_s": from_internal(v, "cm/s"), **res}
        manifest["points"].append(row)
        rows.append(row)
    cols = ["omega0_over_gamma", "v_cm_s", "detected_fraction", "rejected_fraction",
            "mean_operational_us", "mean_kijowski_us", "mean_delay_us", "l1", "ks"]
    ok = [r for r in rows if r["status"] == "ok"]
    write_csv(out / "summary.csv", cols,
              [[r.get(c) if r.get(c) is not None else np.nan for r in ok] for c in cols])
    write_json(out / "manifest.json", manifest)
    failed = [r for r in rows if r["status"] != "ok"]
    if failed:
        codes = sorted({r["exit_code"] for r in failed})
        raise _SweepFailed(f"{len(failed)} of {len(rows)} sweep points failed", codes[-1])
    return manifest


COMMANDS = {
    "simulate": cmd_simulate,
    "kijowski": cmd_kijowski,
    "montecarlo": cmd_montecarlo,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluortoa",
        description="Arrival-time distributions from first fluorescence photons.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="INI configuration file (default: built-in)")
        p.add_argument("--out", type=Path, help="output directory (overrides [output])")
        p.add_argument("--threads", type=int, default=1, help="parallel workers")
        p.add_argument("--frozen-atom", action="store_true",
                       help="disable the kinetic step (test mode)")
        p.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        if args.frozen_atom:
            cfg = replace(cfg, frozen_atom=True)
        if args.command == "montecarlo" and cfg.mc is None:
            cfg = replace(cfg, mc=McSettings())
            cfg.validate()
        out = args.out or cfg.output_dir
        summary = COMMANDS[args.command](cfg, out, max(1, args.threads))
    except FluorToaError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    if not args.quiet:
        for key in ("detected_fraction", "rejected_fraction", "l1", "ks", "mean_delay_us",
                    "survived_fraction", "kijowski_mass"):
            if isinstance(summary, dict) and summary.get(key) is not None:
                log.info("%s = %.6g", key, summary[key])
        log.info("results written to %s", out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
