"""Delimited trajectory output, run summaries, and eigen-structure reports.

The trajectory CSV schema is fixed: ``t``, per-agent ``z{i}_re``/``z{i}_im``,
per-coordinate ``xi{i}_re``/``xi{i}_im``, then ``xi_err_norm`` and
``min_dist``. Floats are written with shortest round-trip repr so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .jsonio import complex_to_json, vector_to_json
from .sim import TrajectoryLog
from .stabilizer import DoubleStabilizerResult, StabilizerResult
from .transforms import TransformPair


def _fmt(value) -> str:
    return repr(float(value))


def trajectory_header(n: int) -> list[str]:
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"z{i}_re", f"z{i}_im"]
    for i in range(1, n + 1):
        cols += [f"xi{i}_re", f"xi{i}_im"]
    cols += ["xi_err_norm", "min_dist"]
    return cols


def _rows(log: TrajectoryLog, indices) -> list[list[str]]:
    rows = []
    for k in indices:
        row = [_fmt(log.t[k])]
        for v in log.z[k]:
            row += [_fmt(v.real), _fmt(v.imag)]
        for v in log.xi[k]:
            row += [_fmt(v.real), _fmt(v.imag)]
        row += [_fmt(log.xi_err_norm[k]), _fmt(log.min_dist[k])]
        rows.append(row)
    return rows


def write_trajectory_csv(log: TrajectoryLog, path) -> None:
    n = log.z.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_header(n))
        writer.writerows(_rows(log, range(log.samples)))


def write_plot_data(log: TrajectoryLog, path, max_rows: int = 2000) -> None:
    """Downsampled copy of the trajectory CSV (always keeps the last sample)."""
    m = log.samples
    stride = max(1, -(-m // max_rows))
    indices = list(range(0, m, stride))
    if indices[-1] != m - 1:
        indices.append(m - 1)
    n = log.z.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_header(n))
        writer.writerows(_rows(log, indices))


def run_summary(log: TrajectoryLog, scenario=None, blowup=None) -> dict:
    summary = {
        "name": log.name,
        "samples": log.samples,
        "dt": log.dt,
        "t_end": float(log.t[-1]) if log.samples else None,
        "terminal_xi_error": log.terminal_xi_error if log.samples else None,
        "terminal_centroid_error": log.terminal_centroid_error if log.samples else None,
        "min_distance": log.min_distance if log.samples else None,
        "event_count": len(log.events),
        "events": [{"t": e.t, "kind": e.kind, "detail": e.detail} for e in log.events[:50]],
    }
    if log.xidot_err is not None:
        summary["terminal_combined_error"] = log.terminal_combined_error
    if scenario is not None:
        summary["seed"] = scenario.seed
        summary["mode"] = scenario.controller.mode
        summary["domain"] = scenario.controller.domain
    if blowup is not None:
        summary["blowup"] = blowup
    return summary


def write_summary(summary: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class EigenReport:
    """Verification record for a diagonal gain against a transformation."""

    mode: str
    d: np.ndarray
    eigenvalues: np.ndarray
    margin: float
    minors: np.ndarray
    stabilizable: bool
    passed: bool
    gamma: float | None = None
    d2: np.ndarray | None = None
    block_eigenvalues: np.ndarray | None = None


def eigen_report_single(result: StabilizerResult, transform: TransformPair) -> EigenReport:
    return EigenReport(
        mode="single",
        d=result.d,
        eigenvalues=result.achieved_eigs,
        margin=result.margin,
        minors=transform.minors,
        stabilizable=transform.stabilizable,
        passed=result.margin > 0,
    )


def eigen_report_double(result: DoubleStabilizerResult, transform: TransformPair) -> EigenReport:
    return EigenReport(
        mode="double",
        d=result.d1,
        eigenvalues=result.sigma,
        margin=result.margin,
        minors=transform.minors,
        stabilizable=transform.stabilizable,
        passed=result.margin > 0,
        gamma=result.gamma,
        d2=result.d2,
        block_eigenvalues=result.block_eigs,
    )


def eigen_report_to_dict(report: EigenReport) -> dict:
    out = {
        "mode": report.mode,
        "d": vector_to_json(report.d),
        "eigenvalues": vector_to_json(report.eigenvalues),
        "margin": report.margin,
        "minors": vector_to_json(report.minors),
        "minor_magnitudes": [float(abs(m)) for m in report.minors],
        "stabilizable": report.stabilizable,
        "passed": report.passed,
    }
    if report.gamma is not None:
        out["gamma"] = report.gamma
        out["d2"] = vector_to_json(report.d2)
        out["block_eigenvalues"] = vector_to_json(report.block_eigenvalues)
    return out


def write_eigen_report(report: EigenReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(eigen_report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def verification_report(d, transform: TransformPair, mode: str = "single",
                        gamma: float | None = None) -> EigenReport:
    """Eigen report for an explicitly supplied diagonal (no synthesis)."""
    d = np.asarray(d, dtype=complex).reshape(-1)
    eigs = np.linalg.eigvals(np.diag(d) @ transform.inverse)
    if mode == "double":
        from .stabilizer import build_block_matrix

        if gamma is None or not gamma > 0:
            raise ValueError("double-mode verification needs gamma > 0")
        d2 = gamma * d
        block_eigs = np.linalg.eigvals(build_block_matrix(d, d2, transform.inverse))
        margin = float(-block_eigs.real.max())
        return EigenReport(
            mode="double", d=d, eigenvalues=eigs, margin=margin, minors=transform.minors,
            stabilizable=transform.stabilizable, passed=margin > 0,
            gamma=gamma, d2=d2, block_eigenvalues=block_eigs,
        )
    margin = float(eigs.real.min())
    return EigenReport(
        mode="single", d=d, eigenvalues=eigs, margin=margin, minors=transform.minors,
        stabilizable=transform.stabilizable, passed=margin > 0,
    )
