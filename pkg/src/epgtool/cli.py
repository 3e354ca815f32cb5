"""Command-line entry points.

Subcommands: ``validate``, ``equilibrium``, ``simulate``, ``bounds``,
``certify``.  All take a JSON config file plus ``--set section.key=value``
overrides.  Exit codes: 0 success, 2 validation failure, 3 runtime failure.
Outputs are deterministic for a fixed configuration.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    AllInfeasible,
    BoundQuery,
    certify_trajectory,
    default_grid,
    peak_bound,
)
from .config import apply_overrides, load_config, resolve
from .dynamics import StepRejected, lyapunov_value, simulate, write_csv
from .equilibrium import endemic_curve
from .params import ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _version_string() -> str:
    """Package version, refined with git describe when run from a checkout."""
    here = Path(__file__).resolve()
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=here.parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0:
            return f"epgtool {__version__} ({described.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"epgtool {__version__}"


def _load(args):
    cfg = load_config(args.config)
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    return resolve(cfg)


def _emit_error(args, exc: Exception, code: int) -> int:
    if getattr(args, "json_errors", False):
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ValidationError):
            payload["violations"] = [
                {"name": v.name, "detail": v.detail} for v in exc.violations
            ]
        print(json.dumps(payload, indent=2))
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(run, path: Path, extra: dict | None = None) -> None:
    manifest = {
        "version": _version_string(),
        "config": run.config,
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_validate(args) -> int:
    run = _load(args)
    print("configuration valid")
    print(f"  strategies: n={run.bundle.strategies.n}, "
          f"betas={list(run.bundle.strategies.betas)}")
    print(f"  budget c*={run.bundle.policy.cstar}, "
          f"upsilon={run.bundle.policy.upsilon}")
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    run = _load(args)
    alloc, params, strategies = run.alloc, run.bundle.params, run.bundle.strategies
    eq = alloc.endemic
    print(f"optimal mix x* = {list(alloc.xstar)} (adjacent pair at index {alloc.istar})")
    print(f"average transmission rate beta* = {alloc.betastar:.12g} /day")
    print(f"endemic equilibrium at beta*: I* = {eq.I_hat:.6g} ({100 * eq.I_hat:.2f}%), "
          f"R* = {eq.R_hat:.6g} ({100 * eq.R_hat:.2f}%)")
    out = _outdir(args)
    grid = default_grid(strategies, run.grid_size)
    curve = endemic_curve(grid, params)
    sweep_path = out / "equilibrium_sweep.csv"
    with open(sweep_path, "w", newline="") as fh:
        fh.write("B,I_hat,R_hat,a,dI_dB,dR_dB,da_dB\n")
        for k in range(grid.size):
            fh.write(
                ",".join(
                    "%.17g" % v
                    for v in (
                        grid[k], curve["I_hat"][k], curve["R_hat"][k],
                        curve["a"][k], curve["dI_dB"][k], curve["dR_dB"][k],
                        curve["da_dB"][k],
                    )
                )
                + "\n"
            )
    print(f"wrote {sweep_path}")
    return EXIT_OK


def _run_simulation(run):
    return simulate(run.initial, run.horizon, run.mech, run.proto, run.integrator)


def _bound_for(run, alpha: float):
    query = BoundQuery(
        alloc=run.alloc,
        params=run.bundle.params,
        upsilon=run.bundle.policy.upsilon,
        alpha=alpha,
        grid=default_grid(run.bundle.strategies, run.grid_size),
    )
    return peak_bound(query)


def _alpha_for(run) -> float:
    if run.alpha is not None:
        return run.alpha
    return lyapunov_value(run.initial, run.mech, run.proto)


def cmd_simulate(args) -> int:
    run = _load(args)
    traj = _run_simulation(run)
    out = _outdir(args)
    csv_path = out / "trajectory.csv"
    write_csv(traj, csv_path)
    _write_manifest(run, out / "manifest.json", {
        "csv_columns": "t,I,R,x1..xn,q,B,cost,avg_cost,L"
                       + (",N" if run.integrator.track_population else ""),
    })
    alpha = _alpha_for(run)
    result = _bound_for(run, alpha)
    report = certify_trajectory(traj, result)
    (out / "certification.json").write_text(
        json.dumps(
            {
                "observed_peak": report.observed_peak,
                "peak_time_days": report.peak_time,
                "certified_peak": report.certified_peak,
                "peak_ratio": report.peak_ratio,
                "alpha": report.alpha,
                "margin": report.margin,
                "passed": report.passed,
            },
            indent=2,
        )
        + "\n"
    )
    k_end = len(traj) - 1
    print(f"simulated {run.horizon} days "
          f"({int(round(run.horizon / run.integrator.step))} steps)")
    print(f"terminal state: I={traj.I[k_end]:.6g} R={traj.R[k_end]:.6g} "
          f"x={[round(float(v), 6) for v in traj.x[k_end]]} q={traj.q[k_end]:.6g}")
    print(f"terminal running-average cost: {traj.avg_cost[k_end]:.6g} "
          f"(budget {run.bundle.policy.cstar})")
    print(report.summary())
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    run = _load(args)
    upsilons = (
        [float(u) for u in args.upsilons.split(",")]
        if args.upsilons
        else [run.bundle.policy.upsilon]
    )
    out = _outdir(args)
    path = out / "bounds_sweep.csv"
    B0 = float(np.dot(run.initial.x, run.bundle.strategies.betas))
    rows = []
    details = []
    for ups in upsilons:
        cfg_alpha = run.alpha
        alpha = (
            cfg_alpha
            if cfg_alpha is not None
            else 0.5 * ups ** 2 * (B0 - run.alloc.betastar) ** 2
        )
        query = BoundQuery(
            alloc=run.alloc,
            params=run.bundle.params,
            upsilon=ups,
            alpha=alpha,
            grid=default_grid(run.bundle.strategies, run.grid_size),
        )
        result = peak_bound(query)
        rows.append((ups, run.alloc.betastar, run.bundle.params.delta,
                     alpha, result.peak_ratio))
        details.append(result.as_dict())
    with open(path, "w", newline="") as fh:
        fh.write("upsilon,beta_star,delta,alpha,peak_ratio\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")
    (out / "bounds_detail.json").write_text(
        json.dumps(details, indent=2) + "\n"
    )
    for ups, _, _, alpha, ratio in rows:
        print(f"upsilon={ups:g}: alpha={alpha:.6g} peak ratio={ratio:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_certify(args) -> int:
    run = _load(args)
    traj = _run_simulation(run)
    alpha = _alpha_for(run)
    result = _bound_for(run, alpha)
    report = certify_trajectory(traj, result)
    out = _outdir(args)
    (out / "certification.json").write_text(
        json.dumps(
            {
                "observed_peak": report.observed_peak,
                "peak_time_days": report.peak_time,
                "certified_peak": report.certified_peak,
                "peak_ratio": report.peak_ratio,
                "alpha": report.alpha,
                "margin": report.margin,
                "passed": report.passed,
            },
            indent=2,
        )
        + "\n"
    )
    print(report.summary())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epgtool",
        description="Simulate and certify epidemic population games "
                    "(rates per day, times in days).",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY.PATH=VALUE",
            help="override a config entry (JSON value), repeatable",
        )
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument(
            "--json-errors", action="store_true",
            help="print machine-readable error JSON to stdout",
        )

    p = sub.add_parser("validate", help="check every model assumption")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "equilibrium",
        help="optimal mix, beta*, endemic pair, and an endemic sweep CSV",
    )
    common(p)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser(
        "simulate",
        help="integrate the closed loop; write trajectory CSV + manifest",
    )
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "bounds", help="peak-bound sweep over upsilon values; write CSV"
    )
    common(p)
    p.add_argument(
        "--upsilons", default=None,
        help="comma-separated upsilon values (default: the config value)",
    )
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser(
        "certify", help="simulate and compare the peak against the bound"
    )
    common(p)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        return _emit_error(args, exc, EXIT_VALIDATION)
    except (FileNotFoundError, KeyError, ValueError, json.JSONDecodeError) as exc:
        return _emit_error(args, exc, EXIT_VALIDATION)
    except (StepRejected, AllInfeasible, ArithmeticError, OSError) as exc:
        return _emit_error(args, exc, EXIT_RUNTIME)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
