"""Independent oracles used by the tests.

These deliberately avoid the code paths they are checking: determinants by
cofactor expansion, quadratic roots by the explicit formula, multiset
comparison by nearest matching.
"""

import cmath

import numpy as np


def det_cofactor(m):
    """Determinant by recursive cofactor expansion along the first row."""
    a = np.asarray(m, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * det_cofactor(minor)
    return total


def quadratic_roots(b, c):
    """Roots of x^2 + b x + c via the explicit formula."""
    s = cmath.sqrt(b * b - 4 * c)
    return (-b + s) / 2, (-b - s) / 2


def multiset_gap(a, b):
    """Worst pairing distance between two complex multisets (greedy nearest)."""
    left = list(np.asarray(a, dtype=complex).reshape(-1))
    right = list(np.asarray(b, dtype=complex).reshape(-1))
    assert len(left) == len(right)
    worst = 0.0
    for v in left:
        gaps = [abs(v - w) for w in right]
        j = int(np.argmin(gaps))
        worst = max(worst, gaps[j])
        right.pop(j)
    return worst


def random_complex_matrix(rng, n, min_minor=0.0):
    """Standard complex normal matrix, resampled until every leading
    principal minor magnitude clears ``min_minor``."""
    while True:
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        minors = [abs(np.linalg.det(a[:k, :k])) for k in range(1, n + 1)]
        if min(minors) > min_minor:
            return a
