import numpy as np
import pytest
from numpy.testing import assert_allclose

from formation_lab import (
    AgentConfig,
    CoincidentAgents,
    PotentialParams,
    SingularBand,
    build_jacobi,
    distance_in_xi,
    min_pair_distance,
    pair_from_forward,
    pair_gradient_coeff,
    pair_potential,
    potential_matrix,
    total_potential,
    transformed_potential,
)
from helpers import multiset_gap

PARAMS = PotentialParams(detection_radius=2.0, avoidance_radius=1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        PotentialParams(detection_radius=1.0, avoidance_radius=1.0)
    with pytest.raises(ValueError):
        PotentialParams(detection_radius=2.0, avoidance_radius=0.0)


def test_pair_potential_outside_detection():
    assert pair_potential(0.0, 3.0, PARAMS) == 0.0
    assert pair_potential(0.0, 2.0, PARAMS) == 0.0  # exactly at R


def test_pair_potential_band_value():
    # d^2 = 2.5: ((2.5-4)/(2.5-1))^2 = 1
    assert pair_potential(0.0, np.sqrt(2.5), PARAMS) == pytest.approx(1.0, abs=1e-12)


def test_pair_potential_blows_up_toward_avoidance_radius():
    values = [pair_potential(0.0, 1.0 + eps, PARAMS) for eps in (0.3, 0.1, 0.01, 1e-4)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 1e6


def test_pair_potential_zero_inside_dead_zone():
    assert pair_potential(0.0, 0.5, PARAMS) == 0.0


def test_pair_errors():
    with pytest.raises(CoincidentAgents):
        pair_potential(1.0 + 1.0j, 1.0 + 1.0j, PARAMS)
    with pytest.raises(SingularBand):
        pair_potential(0.0, 1.0 + 1e-13, PARAMS)
    with pytest.raises(SingularBand):
        pair_gradient_coeff(0.0, 1.0 - 1e-13, PARAMS)


def test_pair_gradient_coeff_cases():
    assert pair_gradient_coeff(0.0, 2.5, PARAMS) == 0.0
    assert pair_gradient_coeff(0.0, 0.5, PARAMS) == 0.0
    # d^2 = 2.5: 4*3*(-1.5)/1.5^3 = -16/3
    assert pair_gradient_coeff(0.0, np.sqrt(2.5), PARAMS) == pytest.approx(-16.0 / 3.0, abs=1e-12)


def test_pair_gradient_matches_finite_differences():
    h = 1e-6
    for d in np.linspace(1.1, 1.9, 9):
        zi, zj = complex(d), 0.0
        p = pair_gradient_coeff(zi, zj, PARAMS)
        grad_re = (pair_potential(zi + h, zj, PARAMS) - pair_potential(zi - h, zj, PARAMS)) / (2 * h)
        grad_im = (pair_potential(zi + 1j * h, zj, PARAMS) - pair_potential(zi - 1j * h, zj, PARAMS)) / (2 * h)
        analytic = p * (zi - zj)
        fd = complex(grad_re, grad_im)
        assert abs(fd - analytic) <= 1e-6 * max(1.0, abs(analytic))


def test_potential_matrix_all_far_apart():
    z = np.array([0.0, 10.0, 20.0 + 5.0j])
    entries = potential_matrix(z, PARAMS).entries
    assert np.abs(entries).max() == 0.0


def test_potential_matrix_two_agents():
    z = np.array([0.0, np.sqrt(2.5) + 0.0j])
    entries = potential_matrix(z, PARAMS).entries
    expected = (-16.0 / 3.0) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert_allclose(entries, expected, atol=1e-12)


def test_potential_matrix_row_structure():
    # row i carries (sum_j p_ij) on the diagonal and -p_ij off it
    rng = np.random.default_rng(4)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    z *= 1.4 / min_pair_distance(z)  # put the closest pair inside the band
    entries = potential_matrix(z, PARAMS).entries
    p = {(i, j): pair_gradient_coeff(z[i], z[j], PARAMS) for i in range(3) for j in range(3) if i != j}
    assert entries[0, 0] == pytest.approx(p[(0, 1)] + p[(0, 2)], abs=1e-12)
    assert entries[0, 1] == pytest.approx(-p[(0, 1)], abs=1e-12)
    assert entries[0, 2] == pytest.approx(-p[(0, 2)], abs=1e-12)


def test_potential_matrix_times_positions_is_stacked_gradient():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        z = 1.2 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        if min_pair_distance(z) < 1.05:
            continue
        entries = potential_matrix(z, PARAMS).entries
        stacked = np.array(
            [sum(pair_gradient_coeff(z[i], z[j], PARAMS) * (z[i] - z[j]) for j in range(n) if j != i)
             for i in range(n)]
        )
        assert np.abs(entries @ z - stacked).max() <= 1e-10


def test_potential_matrix_invariants():
    rng = np.random.default_rng(15)
    done = 0
    while done < 20:
        n = 3 if done % 2 == 0 else 6
        z = 1.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        dmin = min_pair_distance(z)
        if not (1.2 < dmin < 1.9):  # active band, away from the singular radius
            continue
        entries = potential_matrix(z, PARAMS).entries
        assert np.abs(entries.sum(axis=1)).max() <= 1e-12
        assert np.abs(entries - entries.T).max() <= 1e-12
        assert abs((entries @ z).sum()) <= 1e-10
        done += 1


def test_transformed_potential_identity_and_zero():
    pair = build_jacobi(AgentConfig(n=3))
    z = np.array([0.0, 1.5 + 0.0j, 0.7 + 1.2j])
    pz = potential_matrix(z, PARAMS)
    ident_pair = pair_from_forward(np.eye(3))
    assert_allclose(transformed_potential(pz, ident_pair), pz.entries, atol=1e-15)
    assert np.abs(transformed_potential(np.zeros((3, 3)), pair)).max() == 0.0


def test_transformed_potential_consistency_and_similarity():
    pair = build_jacobi(AgentConfig(n=3))
    rng = np.random.default_rng(2)
    z = np.array([0.0, 1.3, 1.3 + 1.3j]) + 0.05 * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    pz = potential_matrix(z, PARAMS)
    lifted = transformed_potential(pz, pair)
    xi = pair.forward @ z
    # (Phi P Phi^-1)(Phi z) == Phi (P z)
    assert np.abs(lifted @ xi - pair.forward @ (pz.entries @ z)).max() <= 1e-9
    # similarity preserves the spectrum
    assert multiset_gap(np.linalg.eigvals(lifted), np.linalg.eigvals(pz.entries)) <= 1e-8


def test_distance_in_xi():
    pair = build_jacobi(AgentConfig(n=3))
    rng = np.random.default_rng(3)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    xi = pair.forward @ z
    for i in range(3):
        for j in range(3):
            expected = abs(z[i] - z[j])
            assert distance_in_xi(xi, pair, i, j) == pytest.approx(expected, abs=1e-10)
    assert distance_in_xi(xi, pair, 1, 1) == 0.0
    # first shape coordinate sqrt(1/2) means |z2 - z1| = 1
    xi_unit = np.array([np.sqrt(0.5), 0.0, 0.0], dtype=complex)
    assert distance_in_xi(xi_unit, pair, 0, 1) == pytest.approx(1.0, abs=1e-12)


def test_gradient_flow_euler_step_matches_across_domains():
    # one explicit-Euler step of zdot = -P z, mapped through Phi, against
    # one step of xidot = -(Phi P Phi^-1) xi
    pair = build_jacobi(AgentConfig(n=3))
    z0 = np.array([0.0, 1.4, 0.9 + 1.1j])
    dt = 1e-3
    pz = potential_matrix(z0, PARAMS).entries
    z1 = z0 - dt * (pz @ z0)
    xi0 = pair.forward @ z0
    xi1 = xi0 - dt * (transformed_potential(pz, pair) @ xi0)
    assert np.abs(pair.forward @ z1 - xi1).max() <= 1e-12


def test_total_potential_sums_pairs():
    z = np.array([0.0, np.sqrt(2.5) + 0.0j, 100.0 + 0.0j])
    assert total_potential(z, PARAMS) == pytest.approx(1.0, abs=1e-12)
