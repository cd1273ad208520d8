"""Figure rendering for run reports (headless matplotlib, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .potential import PotentialParams  # noqa: E402
from .sim import TrajectoryLog  # noqa: E402

_DPI = 140


def save_trajectory_figure(log: TrajectoryLog, path, basis=None) -> None:
    """Agent paths in the plane with start/end markers."""
    fig, ax = plt.subplots(figsize=(7, 6))
    n = log.z.shape[1]
    for i in range(n):
        zi = log.z[:, i]
        (line,) = ax.plot(zi.real, zi.imag, lw=0.9, label=f"agent {i + 1}")
        ax.plot(zi.real[0], zi.imag[0], "o", ms=5, color=line.get_color())
        ax.plot(zi.real[-1], zi.imag[-1], "s", ms=6, color=line.get_color())
    if basis is not None:
        b = np.asarray(basis, dtype=complex)
        ax.plot(np.append(b.real, b.real[0]), np.append(b.imag, b.imag[0]),
                "k--", lw=0.8, alpha=0.5, label="formation basis")
    ax.set_xlabel("Re(z)")
    ax.set_ylabel("Im(z)")
    ax.set_title(f"{log.name or 'run'}: agent trajectories")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_error_figure(log: TrajectoryLog, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    floor = 1e-18  # keep the log axis defined once the error hits zero
    ax.semilogy(log.t, np.maximum(log.xi_err_norm, floor), lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("||xi - xi_d||")
    ax.set_title(f"{log.name or 'run'}: tracking error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_distance_figure(log: TrajectoryLog, path, potential: PotentialParams | None = None) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(log.t, log.min_dist, lw=1.0)
    if potential is not None:
        ax.axhline(potential.avoidance_radius, color="r", ls="--", lw=0.8, label="avoidance radius r")
        ax.axhline(potential.detection_radius, color="g", ls="--", lw=0.8, label="detection radius R")
        ax.legend(fontsize=8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("min inter-agent distance")
    ax.set_title(f"{log.name or 'run'}: closest pair")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_spectrum_figure(eigenvalues, path, block_eigenvalues=None, title="closed-loop spectrum") -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    eigs = np.asarray(eigenvalues, dtype=complex)
    ax.scatter(eigs.real, eigs.imag, marker="x", s=50, label="eigenvalues of D Phi^-1")
    if block_eigenvalues is not None:
        beigs = np.asarray(block_eigenvalues, dtype=complex)
        ax.scatter(beigs.real, beigs.imag, marker="+", s=50, label="block eigenvalues")
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
