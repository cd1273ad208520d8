"""Command-line front end: stabilize | simulate | check.

Exit codes: 0 success, 1 completed-but-failed verification, 2 configuration
error, 3 non-stabilizable minors, 4 stabilizer search exhausted,
5 numerical blowup (partial log flushed), 6 failed invariant or
equivalence check. Log verbosity comes from the FORMATION_LAB_LOG
environment variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys

import numpy as np

from .errors import (
    ConfigError,
    FormationError,
    NonstabilizableMinor,
    NumericalBlowup,
    SearchExhausted,
)
from .potential import potential_matrix
from .report import (
    eigen_report_double,
    eigen_report_single,
    run_summary,
    verification_report,
    write_eigen_report,
    write_plot_data,
    write_summary,
    write_trajectory_csv,
)
from .scenario import load_config, load_scenario
from .sim import TRANSFORMED, run, with_domain
from .stabilizer import stabilize_double, stabilize_single

log = logging.getLogger("formation_lab")

_ERROR_CODES = (
    (ConfigError, 2),
    (NonstabilizableMinor, 3),
    (SearchExhausted, 4),
    (NumericalBlowup, 5),
)


def _exit_code_for(exc: FormationError) -> int:
    for klass, code in _ERROR_CODES:
        if isinstance(exc, klass):
            return code
    return 3 if "singular" in type(exc).__name__.lower() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formation-lab",
                                     description="formation control scenarios: gain synthesis, simulation, checks")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", required=True,
                        help="scenario config path or bundled preset name (repeatable)")
    common.add_argument("--output", default="out", help="output root directory (default: out)")
    common.add_argument("--dt", type=float, default=None, help="override integration step")
    common.add_argument("--t-end", type=float, default=None, help="override simulation horizon")
    common.add_argument("--seed", type=int, default=None, help="override scenario seed")
    common.add_argument("--plot-data", action="store_true", help="write downsampled series for external plotting")
    common.add_argument("--plot", action="store_true", help="render figures (png) next to the csv output")
    common.add_argument("--jobs", type=int, default=1, help="run independent scenarios in parallel")
    sub.add_parser("stabilize", parents=[common], help="synthesize or verify diagonal gains")
    sub.add_parser("simulate", parents=[common], help="integrate the closed loop and write trajectory files")
    sub.add_parser("check", parents=[common], help="run domain-equivalence and invariant checks")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("FORMATION_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _out_dir(root: str, name: str) -> str:
    path = os.path.join(root, name)
    os.makedirs(path, exist_ok=True)
    return path


def _overrides(args) -> dict:
    return {"dt": args.dt, "t_end": args.t_end, "seed": args.seed}


def _scenario_name(source) -> str:
    cfg = load_config(source)
    return str(cfg.get("name") or os.path.splitext(os.path.basename(str(source)))[0])


def _cmd_stabilize_one(source, args) -> int:
    cfg = load_config(source)
    name = str(cfg.get("name") or os.path.splitext(os.path.basename(str(source)))[0])
    scenario_like = dict(cfg)
    # gain synthesis/verification does not need the simulation sections
    from .scenario import _build_agents, _build_controller, _build_policy, _build_transform

    agents = _build_agents(scenario_like)
    transform = _build_transform(scenario_like, agents)
    controller_cfg = scenario_like.get("controller", {})
    mode = controller_cfg.get("mode", "single")
    gamma = float(controller_cfg["gamma"]) if "gamma" in controller_cfg else None
    d_spec = controller_cfg.get("d", "auto")
    if d_spec == "auto":
        policy = _build_policy(controller_cfg.get("policy"))
        if mode == "double":
            if gamma is None:
                raise ConfigError("controller: double mode needs 'gamma'")
            report = eigen_report_double(stabilize_double(transform.inverse, policy, gamma), transform)
        else:
            report = eigen_report_single(stabilize_single(transform.inverse, policy), transform)
    else:
        from .jsonio import vector_from_json

        d = vector_from_json(d_spec, "controller.d")
        report = verification_report(d, transform, mode=mode, gamma=gamma)
    out = _out_dir(args.output, name)
    report_path = os.path.join(out, "eigen_report.json")
    write_eigen_report(report, report_path)
    if args.plot:
        from .plots import save_spectrum_figure

        save_spectrum_figure(report.eigenvalues, os.path.join(out, "spectrum.png"),
                             block_eigenvalues=report.block_eigenvalues,
                             title=f"{name}: closed-loop spectrum")
    print(f"{name}: mode={report.mode} margin={report.margin:.6g} pass={report.passed} -> {report_path}")
    return 0 if report.passed else 1


def _simulate_job(source, overrides, out_root, plot_data, plot):
    """Worker for one scenario; returns (name, exit_code, message)."""
    try:
        scenario = load_scenario(source, overrides)
    except FormationError as exc:
        return str(source), _exit_code_for(exc), f"error: {exc}"
    out = _out_dir(out_root, scenario.name)
    csv_path = os.path.join(out, "trajectory.csv")
    blowup = None
    try:
        trajectory = run(scenario)
        code = 0
    except NumericalBlowup as exc:
        trajectory = exc.partial_log
        blowup = {"t": exc.t, "component": exc.component, "message": str(exc)}
        code = 5
    except FormationError as exc:
        trajectory = getattr(exc, "partial_log", None)
        if trajectory is not None:
            write_trajectory_csv(trajectory, csv_path)
        return scenario.name, _exit_code_for(exc), f"error: {exc}"
    write_trajectory_csv(trajectory, csv_path)
    summary = run_summary(trajectory, scenario, blowup=blowup)
    write_summary(summary, os.path.join(out, "summary.json"))
    if plot_data:
        write_plot_data(trajectory, os.path.join(out, "plot_data.csv"))
    if plot:
        from .plots import save_distance_figure, save_error_figure, save_trajectory_figure

        save_trajectory_figure(trajectory, os.path.join(out, "trajectories.png"), basis=scenario.desired.basis)
        save_error_figure(trajectory, os.path.join(out, "error_norm.png"))
        save_distance_figure(trajectory, os.path.join(out, "min_distance.png"),
                             potential=scenario.controller.potential)
    msg = (f"samples={trajectory.samples} terminal_xi_error={trajectory.terminal_xi_error:.6g} "
           f"min_dist={trajectory.min_distance:.6g} events={len(trajectory.events)} -> {csv_path}")
    if blowup is not None:
        msg += f" (blowup at t={blowup['t']:.6g}, partial log flushed)"
    return scenario.name, code, msg


def _cmd_simulate(args) -> int:
    jobs = []
    for source in args.config:
        jobs.append((source, _overrides(args), args.output, args.plot_data, args.plot))
    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_simulate_job_star, jobs))
    else:
        results = [_simulate_job(*job) for job in jobs]
    code = 0
    for name, job_code, msg in results:
        print(f"{name}: {msg}")
        code = code or job_code
    return code


def _simulate_job_star(job):
    return _simulate_job(*job)


def _check_properties(scenario) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    transform = scenario.transform
    roundtrip = float(np.abs(transform.forward @ transform.inverse - np.eye(transform.n)).max())
    checks.append(("transform_roundtrip", roundtrip <= 1e-10, f"max |Phi Phi^-1 - I| = {roundtrip:.3e}"))

    cfg = scenario.controller
    if cfg.mode == "double":
        from .stabilizer import build_block_matrix

        eigs = np.linalg.eigvals(build_block_matrix(cfg.d, cfg.gamma * cfg.d, transform.inverse))
        margin = float(-eigs.real.max())
    else:
        eigs = np.linalg.eigvals(np.diag(cfg.d) @ transform.inverse)
        margin = float(eigs.real.min())
    checks.append(("stabilizer_margin", margin > 0, f"margin = {margin:.6g}"))

    log_actual = run(with_domain(scenario, "actual"))
    log_transformed = run(with_domain(scenario, TRANSFORMED))
    deviation = float(np.abs(log_actual.xi - log_transformed.xi).max())
    checks.append(("domain_equivalence", deviation <= 1e-6, f"max deviation = {deviation:.3e}"))

    view_gap = float(np.abs((log_transformed.z @ transform.forward.T) - log_transformed.xi).max())
    checks.append(("state_view_consistency", view_gap <= 1e-9, f"max |Phi z - xi| = {view_gap:.3e}"))

    if cfg.potential is not None:
        stride = max(1, log_transformed.samples // 16)
        worst_row = worst_sym = worst_balance = 0.0
        for k in range(0, log_transformed.samples, stride):
            entries = potential_matrix(log_transformed.z[k], cfg.potential).entries
            worst_row = max(worst_row, float(np.abs(entries.sum(axis=1)).max()))
            worst_sym = max(worst_sym, float(np.abs(entries - entries.T).max()))
            worst_balance = max(worst_balance, float(abs((entries @ log_transformed.z[k]).sum())))
        checks.append(("potential_row_sums", worst_row <= 1e-12, f"max |row sum| = {worst_row:.3e}"))
        checks.append(("potential_symmetry", worst_sym <= 1e-12, f"max asymmetry = {worst_sym:.3e}"))
        checks.append(("potential_force_balance", worst_balance <= 1e-10, f"max |sum (P z)| = {worst_balance:.3e}"))
    return checks


def _cmd_check_one(source, args) -> int:
    scenario = load_scenario(source, _overrides(args))
    checks = _check_properties(scenario)
    out = _out_dir(args.output, scenario.name)
    report = {"name": scenario.name,
              "checks": [{"property": name, "passed": ok, "detail": detail} for name, ok, detail in checks],
              "passed": all(ok for _, ok, _ in checks)}
    path = os.path.join(out, "check_report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, ok, detail in checks:
        print(f"{scenario.name}: {'ok  ' if ok else 'FAIL'} {name} ({detail})")
    if not report["passed"]:
        first = next(name for name, ok, _ in checks if not ok)
        print(f"{scenario.name}: first failing property: {first}")
        return 6
    return 0


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        code = 0
        for source in args.config:
            if args.command == "stabilize":
                code = code or _cmd_stabilize_one(source, args)
            else:
                code = code or _cmd_check_one(source, args)
        return code
    except FormationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
