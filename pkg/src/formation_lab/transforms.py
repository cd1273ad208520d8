"""Centroid-based linear transformations over complex agent positions.

A centroid-based transformation (CBT) maps stacked planar positions,
written as complex scalars z_1 .. z_n, onto n-1 shape coordinates plus a
mass-weighted centroid. The Jacobi construction is the canonical example:
shape row i measures how far agent i+1 sits from the centroid of the first
i agents, scaled by the square root of the reduced mass of that split.

Every transformation is carried as a :class:`TransformPair` holding the
forward matrix, its verified inverse, and the leading principal minors of
the inverse. Those minors are the solvability data for the diagonal
stabilizer synthesis downstream: a pair whose inverse has a (numerically)
zero minor is flagged non-stabilizable but remains usable as a coordinate
change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTransform, SingularTransform

ROUNDTRIP_TOL = 1e-10
MINOR_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AgentConfig:
    """Agent count and strictly positive masses (defaults to unit masses)."""

    n: int
    masses: tuple[float, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"need at least 2 agents, got n={self.n}")
        masses = self.masses
        if masses is None:
            masses = (1.0,) * self.n
        masses = tuple(float(m) for m in masses)
        if len(masses) != self.n:
            raise ValueError(f"expected {self.n} masses, got {len(masses)}")
        if any(m <= 0 for m in masses):
            raise ValueError("all masses must be strictly positive")
        object.__setattr__(self, "masses", masses)

    @property
    def total_mass(self) -> float:
        return sum(self.masses)


@dataclass(frozen=True)
class WeightMatrix:
    """Diagonal complex weights w_i applied on top of a real CBT."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if np.any(np.abs(w) <= MINOR_TOL):
            raise SingularTransform("every diagonal weight must be nonzero")
        object.__setattr__(self, "weights", _readonly(w))


@dataclass(frozen=True)
class TransformPair:
    """A transformation with its verified inverse and cached minors.

    ``minors[k]`` is the determinant of the top-left (k+1)x(k+1) block of
    the *inverse* matrix; ``stabilizable`` reports whether all of them
    clear the zero threshold.
    """

    forward: np.ndarray
    inverse: np.ndarray
    minors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "forward", _readonly(np.asarray(self.forward, dtype=complex)))
        object.__setattr__(self, "inverse", _readonly(np.asarray(self.inverse, dtype=complex)))
        object.__setattr__(self, "minors", _readonly(np.asarray(self.minors, dtype=complex)))

    @property
    def n(self) -> int:
        return self.forward.shape[0]

    @property
    def stabilizable(self) -> bool:
        return bool(np.all(np.abs(self.minors) > MINOR_TOL))


def leading_minors(m) -> np.ndarray:
    """Determinants of the top-left k x k blocks, k = 1 .. n."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return np.array([np.linalg.det(a[:k, :k]) for k in range(1, a.shape[0] + 1)])


def pair_from_parts(forward, inverse, tol: float = ROUNDTRIP_TOL) -> TransformPair:
    """Assemble a TransformPair from a forward/inverse couple, verifying the product."""
    fwd = np.asarray(forward, dtype=complex)
    inv = np.asarray(inverse, dtype=complex)
    err = np.abs(fwd @ inv - np.eye(fwd.shape[0])).max()
    if not err <= tol:
        raise SingularTransform(f"inverse verification failed: max |Phi Phi^-1 - I| = {err:.3e} > {tol:.1e}")
    return TransformPair(forward=fwd, inverse=inv, minors=leading_minors(inv))


def pair_from_forward(forward, tol: float = ROUNDTRIP_TOL) -> TransformPair:
    """Invert ``forward`` (LU with partial pivoting) and package the pair."""
    fwd = np.asarray(forward, dtype=complex)
    if fwd.ndim != 2 or fwd.shape[0] != fwd.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {fwd.shape}")
    try:
        inv = np.linalg.inv(fwd)
    except np.linalg.LinAlgError as exc:
        raise SingularTransform(f"matrix is singular: {exc}") from exc
    return pair_from_parts(fwd, inv, tol)


def build_jacobi(config: AgentConfig, scales=None) -> TransformPair:
    """Jacobi transformation for arbitrary positive masses.

    Shape row i (1-based) maps z to
    ``s_i * (z_{i+1} - mass-weighted mean of z_1..z_i)`` where the default
    row scale is ``s_i = sqrt(mu_i)`` with the reduced mass
    ``1/mu_i = 1/(m_1+..+m_i) + 1/m_{i+1}``. The last row is the
    mass-weighted centroid. Pass ``scales`` (length n-1) to override the
    row scales, e.g. to use pre-rooted values directly.
    """
    n = config.n
    m = np.asarray(config.masses, dtype=float)
    if scales is not None:
        scales = [float(s) for s in scales]
        if len(scales) != n - 1:
            raise ValueError(f"expected {n - 1} row scales, got {len(scales)}")
    phi = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        prefix = m[:i].sum()
        if scales is None:
            mu = 1.0 / (1.0 / prefix + 1.0 / m[i])
            s = np.sqrt(mu)
        else:
            s = scales[i - 1]
        phi[i - 1, :i] = -s * m[:i] / prefix
        phi[i - 1, i] = s
    phi[n - 1, :] = m / config.total_mass
    return pair_from_forward(phi)


def build_phi6() -> TransformPair:
    """Fixed 6-agent transformation pairing adjacent agents hierarchically.

    Rows 1-3 are scaled differences of the pairs (1,2), (3,4), (5,6);
    rows 4-5 compare pair sums; row 6 is the plain centroid. Note that the
    inverse of this matrix has vanishing leading principal minors (the
    second shape coordinate does not feed back into agents 1 and 2), so
    the pair is reported as non-stabilizable by the sequential synthesis.
    """
    s = 1.0 / np.sqrt(2.0)
    phi = np.array(
        [
            [-s, s, 0, 0, 0, 0],
            [0, 0, s, -s, 0, 0],
            [0, 0, 0, 0, s, -s],
            [-0.5, -0.5, 0.5, 0.5, 0, 0],
            [0.25, 0.25, 0.25, 0.25, -0.5, -0.5],
            [1 / 6, 1 / 6, 1 / 6, 1 / 6, 1 / 6, 1 / 6],
        ],
        dtype=complex,
    )
    return pair_from_forward(phi)


def apply_weight(t: TransformPair, w: WeightMatrix) -> TransformPair:
    """Left-multiply by diag(w): forward = W T, inverse = T^-1 W^-1."""
    weights = w.weights
    if len(weights) != t.n:
        raise ValueError(f"expected {t.n} weights, got {len(weights)}")
    forward = weights[:, None] * t.forward
    inverse = t.inverse * (1.0 / weights)[None, :]
    return pair_from_parts(forward, inverse)


def map_points(t: TransformPair, z, direction: str = "forward") -> np.ndarray:
    """Apply the transformation (or its inverse) to a stacked position vector."""
    vec = np.asarray(z, dtype=complex).reshape(-1)
    if len(vec) != t.n:
        raise ValueError(f"expected a length-{t.n} vector, got {len(vec)}")
    if direction == "forward":
        return t.forward @ vec
    if direction == "inverse":
        return t.inverse @ vec
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def invert_3x3_closed_form(phi) -> np.ndarray:
    """Closed-form inverse of a 3x3 CBT whose first shape row couples only
    the first two agents (entry (1,3) must be zero).

    Solves the first row for z_1, eliminates it from the remaining rows and
    inverts the resulting 2x2 system. Denominators below 1e-12 in magnitude
    raise :class:`DegenerateTransform`.
    """
    a = np.asarray(phi, dtype=complex)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    if abs(a[0, 2]) > MINOR_TOL:
        raise DegenerateTransform("first row must involve only the first two agents (entry (1,3) nonzero)")
    a11, a12 = a[0, 0], a[0, 1]
    a21, a22, a23 = a[1, 0], a[1, 1], a[1, 2]
    a31, a32, a33 = a[2, 0], a[2, 1], a[2, 2]
    if abs(a11) < MINOR_TOL:
        raise DegenerateTransform("entry (1,1) vanishes; cannot eliminate the first agent")
    # eliminate z_1: reduced 2x2 system in (z_2, z_3)
    d2 = a22 - a21 * a12 / a11
    g2 = a32 - a31 * a12 / a11
    ax2 = a33 * d2 - a23 * g2
    ax3 = a23 * g2 - a33 * d2
    if abs(ax2) < MINOR_TOL or abs(ax3) < MINOR_TOL:
        raise DegenerateTransform("reduced 2x2 system is singular")
    inv = np.empty((3, 3), dtype=complex)
    inv[1, 0] = (a23 * a31 / a11 - a33 * a21 / a11) / ax2
    inv[1, 1] = a33 / ax2
    inv[1, 2] = -a23 / ax2
    inv[2, 0] = (a31 / a11 * d2 - a21 / a11 * g2) / ax3
    inv[2, 1] = g2 / ax3
    inv[2, 2] = -d2 / ax3
    # back-substitute z_1 = (xi_1 - a12 z_2) / a11
    inv[0, 0] = 1.0 / a11 - a12 / a11 * inv[1, 0]
    inv[0, 1] = -a12 / a11 * inv[1, 1]
    inv[0, 2] = -a12 / a11 * inv[1, 2]
    return inv
