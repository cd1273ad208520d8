"""Diagonal stabilizer synthesis for closed loops of the form D @ inv(Phi).

Given a square complex matrix A = inv(Phi) whose leading principal minors
are all nonzero, the synthesis builds a diagonal D one entry at a time:
d_1 places the first closed-loop eigenvalue at a chosen positive seed, and
each subsequent d_{i+1} is selected so the spectrum of the leading
(i+1)x(i+1) block of D A stays in the open right half-plane. Entry
selection scores candidates on a log-polar grid by the minimum real part
of the resulting block spectrum, refines locally around the best cell, and
falls back to an exact root-placement bisection (which provably succeeds
for small enough targets when the minors are nonzero) if the grid finds
nothing feasible.

The double-integrator variant reuses the same sweep but ranks feasible
candidates by the stability margin of the quadratic
``lam^2 + gamma*sigma*lam + sigma`` over the block eigenvalues sigma,
since with D2 = gamma * D1 the 2n x 2n closed-loop block spectrum is
exactly the union of those quadratic roots.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCondition, NonstabilizableMinor, SearchExhausted, SingularBlock
from .transforms import MINOR_TOL, _readonly, leading_minors

# widened sweep used only when the configured grid finds nothing feasible
_WIDE_MAGNITUDES = tuple(np.logspace(-3, 3, 25))
_WIDE_PHASES = tuple(2.0 * np.pi * np.arange(48) / 48.0)
_PLACEMENT_HALVINGS = 80
_INFEASIBLE_OFFSET = 1e9


def _default_magnitudes() -> tuple[float, ...]:
    return tuple(np.logspace(-2, 2, 13))


def _default_phases() -> tuple[float, ...]:
    return tuple(2.0 * np.pi * np.arange(16) / 16.0)


@dataclass(frozen=True)
class SearchPolicy:
    """Knobs of the candidate sweep.

    ``seed_eigenvalue`` is the prescribed first closed-loop eigenvalue
    (d_1 = seed / A[0,0] exactly). Candidates are mag * exp(1j*phase) over
    the configured sets; ties on score resolve to the smallest magnitude,
    then the smallest phase, preferring low gain.
    """

    seed_eigenvalue: float = 1.0
    candidate_magnitudes: tuple[float, ...] = field(default_factory=_default_magnitudes)
    candidate_phases: tuple[float, ...] = field(default_factory=_default_phases)
    max_refinements: int = 3

    def __post_init__(self):
        if not self.seed_eigenvalue > 0:
            raise ValueError("seed_eigenvalue must be positive")
        if len(self.candidate_magnitudes) == 0 or len(self.candidate_phases) == 0:
            raise ValueError("candidate sets must be nonempty")
        if any(m <= 0 for m in self.candidate_magnitudes):
            raise ValueError("candidate magnitudes must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be a positive integer")


@dataclass(frozen=True)
class StabilizerResult:
    """Diagonal d, the spectrum of diag(d) @ A, and its worst real part."""

    d: np.ndarray
    achieved_eigs: np.ndarray
    margin: float

    def __post_init__(self):
        object.__setattr__(self, "d", _readonly(np.asarray(self.d, dtype=complex)))
        object.__setattr__(self, "achieved_eigs", _readonly(np.asarray(self.achieved_eigs, dtype=complex)))


@dataclass(frozen=True)
class DoubleStabilizerResult:
    """Pair (d1, d2 = gamma*d1) with the 2n-block spectrum and Hurwitz margin."""

    d1: np.ndarray
    d2: np.ndarray
    gamma: float
    block_eigs: np.ndarray
    margin: float
    sigma: np.ndarray  # spectrum of diag(d1) @ A

    def __post_init__(self):
        for name in ("d1", "d2", "block_eigs", "sigma"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=complex)))


def _square_complex(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _char_poly_adjugate(b: np.ndarray):
    """Faddeev-LeVerrier recursion.

    Returns (q, s_list) with q the monic characteristic polynomial of ``b``
    (coefficients highest degree first) and s_list the matrices of
    ``adj(lam I - b) = sum_k lam^(i-1-k) s_list[k]``.
    """
    i = b.shape[0]
    q = np.zeros(i + 1, dtype=complex)
    q[0] = 1.0
    s_list: list[np.ndarray] = []
    if i == 0:
        return q, s_list
    sk = np.eye(i, dtype=complex)
    s_list.append(sk)
    for k in range(1, i + 1):
        m = b @ sk
        ck = -np.trace(m) / k
        q[k] = ck
        if k < i:
            sk = m + ck * np.eye(i)
            s_list.append(sk)
    return q, s_list


def _schur_reduction(d_prefix: np.ndarray, block: np.ndarray):
    """Polynomial data of the partitioned characteristic equation.

    With B = diag(d_prefix) @ block[:i,:i], the characteristic polynomial of
    the bordered matrix M(c) factors through the Schur complement as
    ``p_c(lam) = lam * q(lam) - c * (corner * q(lam) + tail(lam))`` where q
    is the characteristic polynomial of B and tail encodes the coupling row
    and column through the adjugate of (lam I - B).
    """
    i = len(d_prefix)
    b = (np.diag(d_prefix) @ block[:i, :i]) if i else np.zeros((0, 0), dtype=complex)
    q, s_list = _char_poly_adjugate(b)
    corner = block[i, i]
    row = block[i, :i]
    col = (np.asarray(d_prefix) * block[:i, i]) if i else np.zeros(0, dtype=complex)
    tail = np.array([row @ s_list[k] @ col for k in range(i)], dtype=complex)
    return q, tail, corner


def _schur_char_poly(q, tail, corner, candidate) -> np.ndarray:
    i = len(q) - 1
    base = np.append(q, 0.0)  # lam * q(lam)
    s = np.append(0.0, q) * corner
    if i:
        s[2:] += tail
    return base - candidate * s


def schur_eig_step(d_prefix, phi_partition, candidate) -> np.ndarray:
    """Eigenvalues of the bordered block via the partitioned characteristic
    equation (Schur-complement route), not via a dense eigensolver.

    ``phi_partition`` is the (i+1)x(i+1) leading block of inv(Phi) and
    ``candidate`` the trial entry d_{i+1}. Requires the current block
    product diag(d_prefix) @ phi_partition[:i,:i] to be invertible.
    """
    prefix = np.asarray(d_prefix, dtype=complex).reshape(-1)
    block = _square_complex(phi_partition)
    i = len(prefix)
    if block.shape != (i + 1, i + 1):
        raise ValueError(f"partition must be {(i + 1, i + 1)} for a prefix of length {i}, got {block.shape}")
    if i:
        det = np.linalg.det(np.diag(prefix) @ block[:i, :i])
        if abs(det) < MINOR_TOL:
            raise SingularBlock(f"|det(D_ii Phi_ii)| = {abs(det):.3e} below {MINOR_TOL:.1e}")
    q, tail, corner = _schur_reduction(prefix, block)
    return np.roots(_schur_char_poly(q, tail, corner, complex(candidate)))


def verify_half_plane(d, phi_inv, side: str = "right") -> tuple[bool, float]:
    """Check every eigenvalue of diag(d) @ phi_inv against a half-plane.

    Returns (ok, margin) where margin is the signed distance of the worst
    eigenvalue into the requested half-plane.
    """
    a = _square_complex(phi_inv)
    dd = np.asarray(d, dtype=complex).reshape(-1)
    if len(dd) != a.shape[0]:
        raise ValueError(f"diagonal length {len(dd)} does not match matrix size {a.shape[0]}")
    eigs = np.linalg.eigvals(np.diag(dd) @ a)
    if side == "right":
        margin = float(eigs.real.min())
    elif side == "left":
        margin = float(-eigs.real.max())
    else:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    return margin > 0, margin


def complex_quadratic_roots(sigma, gamma: float):
    """Both roots of lam^2 + gamma*sigma*lam + sigma and a Hurwitz flag."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    s = complex(sigma)
    b = gamma * s
    disc = b * b - 4.0 * s
    root = cmath.sqrt(disc)
    r1 = (-b + root) / 2.0
    r2 = (-b - root) / 2.0
    return (r1, r2), (r1.real < 0 and r2.real < 0)


def stability_inequality_diagnostic(sigma, gamma: float) -> bool:
    """Closed-form predicate Re(s)^3 / (Im(s)^2 (1 - Re(s))) > 1/gamma^2.

    Diagnostic only: the inequality does not track the actual root
    locations over the whole parameter range, so stability decisions are
    always made with :func:`complex_quadratic_roots`. Raises
    :class:`DegenerateCondition` when the denominator vanishes (pure-real
    sigma or Re(sigma) = 1).
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    s = complex(sigma)
    den = (s.imag ** 2) * (1.0 - s.real)
    if den == 0:
        raise DegenerateCondition(f"denominator Im(s)^2 (1 - Re(s)) vanishes for sigma = {s}")
    return s.real ** 3 / den > 1.0 / gamma**2


def _quadratic_margin(sigma, gamma: float) -> float:
    (r1, r2), _ = complex_quadratic_roots(sigma, gamma)
    return -max(r1.real, r2.real)


def _grid_search(score, magnitudes, phases, refinements: int, shape: int = 5):
    """Maximize score over mag*exp(1j*phase); ties prefer low magnitude, then low phase.

    Refinement rounds re-grid around the incumbent with shrinking spans in
    log-magnitude and phase. Deterministic for fixed inputs.
    """
    best_score, best_m, best_p = -np.inf, np.inf, np.inf

    def consider(m: float, p: float):
        nonlocal best_score, best_m, best_p
        sc = score(cmath.rect(m, p))
        if sc > best_score or (sc == best_score and (m, p) < (best_m, best_p)):
            best_score, best_m, best_p = sc, m, p

    for m in magnitudes:
        for p in phases:
            consider(m, p)
    span_m = np.log10(magnitudes[1] / magnitudes[0]) if len(magnitudes) > 1 else 0.5
    span_p = (phases[1] - phases[0]) / 2.0 if len(phases) > 1 else 0.2
    for _ in range(refinements):
        m0, p0 = best_m, best_p
        for dm in np.linspace(-span_m, span_m, shape):
            for dp in np.linspace(-span_p, span_p, shape):
                consider(m0 * 10.0**dm, p0 + dp)
        span_m /= 2.0
        span_p /= 2.0
    return best_score, best_m, best_p


def _placement_fallback(d_prefix, block, seed: float, accept):
    """Exact-placement bisection: pin one eigenvalue at a shrinking positive
    target and keep the first candidate the acceptance predicate passes.

    For target t the candidate c = t q(t) / s(t) makes lam = t an exact
    root of the bordered characteristic polynomial; as t -> 0+ the
    remaining roots approach the (right-half-plane) prefix spectrum, so
    small enough targets always succeed when the minors are nonzero.
    """
    q, tail, corner = _schur_reduction(d_prefix, block)
    target = float(seed)
    for _ in range(_PLACEMENT_HALVINGS):
        s_val = corner * np.polyval(q, target) + (np.polyval(tail, target) if len(tail) else 0.0)
        if s_val != 0:
            c = target * np.polyval(q, target) / s_val
            if c != 0 and accept(c):
                return c
        target /= 2.0
    return None


def _min_real_eig(d_prefix, block, candidate) -> float:
    m = np.diag(np.append(d_prefix, candidate)) @ block
    return float(np.linalg.eigvals(m).real.min())


def _choose_entry(d_prefix, block, policy: SearchPolicy, score, accept):
    best = _grid_search(score, policy.candidate_magnitudes, policy.candidate_phases, policy.max_refinements)
    if best[0] <= 0:
        best = _grid_search(score, _WIDE_MAGNITUDES, _WIDE_PHASES, policy.max_refinements + 2)
    if best[0] > 0:
        candidate = cmath.rect(best[1], best[2])
        if accept(candidate):
            return candidate
    return _placement_fallback(d_prefix, block, policy.seed_eigenvalue, accept)


def _check_minors(a: np.ndarray) -> np.ndarray:
    minors = leading_minors(a)
    small = np.abs(minors) <= MINOR_TOL
    if small.any():
        k = int(np.argmax(small))
        raise NonstabilizableMinor(
            f"leading principal minor {k + 1} of the inverse transform is zero "
            f"within {MINOR_TOL:.1e} (value {minors[k]:.3e})"
        )
    return minors


def _schur_route_positive(d_prefix, block, candidate) -> bool:
    eigs = schur_eig_step(d_prefix, block, candidate)
    return float(eigs.real.min()) > 0


def stabilize_single(phi_inv, policy: SearchPolicy | None = None) -> StabilizerResult:
    """Find diagonal d with every eigenvalue of diag(d) @ phi_inv in the
    open right half-plane.

    d_1 = seed / phi_inv[0,0] exactly; each later entry must keep the
    leading block spectrum strictly right of the imaginary axis on both
    the partitioned (Schur) route and a dense eigensolver. The reported
    margin comes from a dense eigensolve of the full product, independent
    of the construction path.
    """
    a = _square_complex(phi_inv)
    policy = policy or SearchPolicy()
    _check_minors(a)
    n = a.shape[0]
    d = np.empty(n, dtype=complex)
    d[0] = policy.seed_eigenvalue / a[0, 0]
    for i in range(1, n):
        block = a[: i + 1, : i + 1]
        prefix = d[:i].copy()

        def score(c):
            return _min_real_eig(prefix, block, c)

        def accept(c):
            return score(c) > 0 and _schur_route_positive(prefix, block, c)

        choice = _choose_entry(prefix, block, policy, score, accept)
        if choice is None:
            raise SearchExhausted(
                f"no candidate for diagonal entry {i + 1} kept the leading "
                f"{i + 1}x{i + 1} closed-loop block in the open right half-plane"
            )
        d[i] = choice
    achieved = np.linalg.eigvals(np.diag(d) @ a)
    margin = float(achieved.real.min())
    if margin <= 0:
        raise SearchExhausted(f"full-spectrum verification failed with margin {margin:.3e}")
    return StabilizerResult(d=d, achieved_eigs=achieved, margin=margin)


def build_block_matrix(d1, d2, phi_inv) -> np.ndarray:
    """Closed-loop block [[0, I], [-D1 A, -D2 A]] of the double integrator."""
    a = _square_complex(phi_inv)
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, n:] = np.eye(n)
    block[n:, :n] = -np.diag(np.asarray(d1, dtype=complex)) @ a
    block[n:, n:] = -np.diag(np.asarray(d2, dtype=complex)) @ a
    return block


def stabilize_double(phi_inv, policy: SearchPolicy | None = None, gamma: float = 2.0) -> DoubleStabilizerResult:
    """Find (D1, D2 = gamma*D1) making the double-integrator block Hurwitz.

    The sweep keeps the single-integrator feasibility requirement (block
    spectrum of D1 A in the open right half-plane) and ranks feasible
    candidates by the worst quadratic-root margin over the block
    eigenvalues. The final verdict is a dense eigensolve of the assembled
    2n x 2n block matrix.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a = _square_complex(phi_inv)
    policy = policy or SearchPolicy()
    _check_minors(a)
    n = a.shape[0]
    d = np.empty(n, dtype=complex)
    d[0] = policy.seed_eigenvalue / a[0, 0]
    for i in range(1, n):
        block = a[: i + 1, : i + 1]
        prefix = d[:i].copy()

        def score(c):
            m = np.diag(np.append(prefix, c)) @ block
            eigs = np.linalg.eigvals(m)
            min_re = float(eigs.real.min())
            if min_re <= 0:
                return min_re - _INFEASIBLE_OFFSET
            return min(_quadratic_margin(s, gamma) for s in eigs)

        def accept(c):
            return score(c) > 0 and _schur_route_positive(prefix, block, c)

        choice = _choose_entry(prefix, block, policy, score, accept)
        if choice is None:
            raise SearchExhausted(
                f"no candidate for diagonal entry {i + 1} was compatible with "
                f"gamma = {gamma} (quadratic roots unstable for every sweep candidate)"
            )
        d[i] = choice
    sigma = np.linalg.eigvals(np.diag(d) @ a)
    d2 = gamma * d
    block_eigs = np.linalg.eigvals(build_block_matrix(d, d2, a))
    margin = float(-block_eigs.real.max())
    if margin <= 0:
        raise SearchExhausted(f"assembled block matrix is not Hurwitz (margin {margin:.3e})")
    return DoubleStabilizerResult(d1=d, d2=d2, gamma=float(gamma), block_eigs=block_eigs, margin=margin, sigma=sigma)
