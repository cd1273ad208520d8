"""Pairwise collision-avoidance potential and its matrix form.

The potential between two agents depends only on their distance d:
zero outside the detection radius R, unbounded as d approaches the
avoidance radius r from above, and (by construction) zero again inside r,
where the gradient is switched off. The per-pair gradient is
``p(d) * (z_i - z_j)`` with the real coefficient

    p(d) = 4 (R^2 - r^2) (d^2 - R^2) / (d^2 - r^2)^3      for r < d < R

which is negative on the active band, i.e. repulsive once negated in the
control law. Stacking all pairs gives the matrix of potential P with
``(P z)_i = sum_j p_ij (z_i - z_j)``: symmetric, zero row sums, and the
avoidance controller is u_a = -P z (or its similarity image in the
transformed coordinates).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentAgents, SingularBand
from .transforms import TransformPair, _readonly

COINCIDENT_TOL = 1e-14
BAND_TOL = 1e-12


@dataclass(frozen=True)
class PotentialParams:
    """Detection radius R and avoidance radius r with R > r > 0."""

    detection_radius: float
    avoidance_radius: float

    def __post_init__(self):
        R, r = float(self.detection_radius), float(self.avoidance_radius)
        if not (R > r > 0):
            raise ValueError(f"need detection_radius > avoidance_radius > 0, got R={R}, r={r}")
        object.__setattr__(self, "detection_radius", R)
        object.__setattr__(self, "avoidance_radius", r)


@dataclass(frozen=True)
class PotentialMatrix:
    """Matrix of potential P with (P z) equal to the stacked pair gradients."""

    entries: np.ndarray
    params: PotentialParams

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(np.asarray(self.entries, dtype=complex)))


def _checked_distance(zi, zj, params: PotentialParams) -> float:
    d = abs(complex(zi) - complex(zj))
    if d < COINCIDENT_TOL:
        raise CoincidentAgents(f"agents coincide (distance {d:.3e})")
    if abs(d - params.avoidance_radius) < BAND_TOL:
        raise SingularBand(f"distance {d!r} sits on the avoidance radius {params.avoidance_radius}")
    return d


def pair_potential(zi, zj, params: PotentialParams) -> float:
    """Potential value (min{0, (d^2-R^2)/(d^2-r^2)})^2 for one pair."""
    d = _checked_distance(zi, zj, params)
    R, r = params.detection_radius, params.avoidance_radius
    if d >= R:
        return 0.0
    d2 = d * d
    ratio = (d2 - R * R) / (d2 - r * r)
    return min(0.0, ratio) ** 2


def pair_gradient_coeff(zi, zj, params: PotentialParams) -> float:
    """Gradient coefficient p(d); the pair gradient is p * (z_i - z_j).

    Zero outside the detection radius and inside the avoidance radius
    (dead zone); the simulator reports entries into the dead zone as
    avoidance-breach events rather than forcing a repulsion there.
    """
    d = _checked_distance(zi, zj, params)
    R, r = params.detection_radius, params.avoidance_radius
    if d >= R or d < r:
        return 0.0
    d2 = d * d
    return 4.0 * (R * R - r * r) * (d2 - R * R) / (d2 - r * r) ** 3


def gradient_coeff_matrix(z, params: PotentialParams) -> np.ndarray:
    """All pairwise coefficients p_ij as a real symmetric matrix (zero diagonal)."""
    zz = np.asarray(z, dtype=complex).reshape(-1)
    n = len(zz)
    diff = zz[:, None] - zz[None, :]
    dist = np.abs(diff)
    off = ~np.eye(n, dtype=bool)
    R, r = params.detection_radius, params.avoidance_radius
    dmin = dist[off].min()
    if dmin < COINCIDENT_TOL:
        i, j = np.unravel_index(int(np.argmin(np.where(off, dist, np.inf))), dist.shape)
        raise CoincidentAgents(f"agents {i + 1} and {j + 1} coincide (distance {dmin:.3e})")
    band_gap = np.abs(dist[off] - r).min()
    if band_gap < BAND_TOL:
        raise SingularBand(f"an inter-agent distance sits on the avoidance radius (gap {band_gap:.3e})")
    active = off & (dist > r) & (dist < R)
    d2 = dist * dist
    p = np.zeros((n, n))
    p[active] = 4.0 * (R * R - r * r) * (d2[active] - R * R) / (d2[active] - r * r) ** 3
    return p


def potential_matrix(z, params: PotentialParams) -> PotentialMatrix:
    """Assemble P: off-diagonal -p_ij, diagonal sum_j p_ij (zero row sums)."""
    p = gradient_coeff_matrix(z, params)
    entries = (-p).astype(complex)
    np.fill_diagonal(entries, p.sum(axis=1))
    return PotentialMatrix(entries=entries, params=params)


def transformed_potential(pz, t: TransformPair) -> np.ndarray:
    """Similarity image Phi P Phi^-1 of the matrix of potential."""
    entries = pz.entries if isinstance(pz, PotentialMatrix) else np.asarray(pz, dtype=complex)
    if entries.shape != (t.n, t.n):
        raise ValueError(f"matrix shape {entries.shape} does not match transform size {t.n}")
    return t.forward @ entries @ t.inverse


def distance_in_xi(xi, t: TransformPair, i: int, j: int) -> float:
    """Inter-agent distance |z_i - z_j| evaluated from transformed coordinates."""
    vec = np.asarray(xi, dtype=complex).reshape(-1)
    if len(vec) != t.n:
        raise ValueError(f"expected a length-{t.n} vector, got {len(vec)}")
    if not (0 <= i < t.n and 0 <= j < t.n):
        raise IndexError(f"agent indices ({i}, {j}) out of range for n={t.n}")
    z = t.inverse @ vec
    return abs(z[i] - z[j])


def total_potential(z, params: PotentialParams) -> float:
    """Sum of pair potentials over unordered pairs."""
    zz = np.asarray(z, dtype=complex).reshape(-1)
    total = 0.0
    for i in range(len(zz)):
        for j in range(i + 1, len(zz)):
            total += pair_potential(zz[i], zz[j], params)
    return total


def min_pair_distance(z) -> float:
    """Smallest inter-agent distance in a stacked position vector."""
    zz = np.asarray(z, dtype=complex).reshape(-1)
    diff = zz[:, None] - zz[None, :]
    dist = np.abs(diff)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())
