import numpy as np
import pytest
from numpy.testing import assert_allclose

from formation_lab import (
    AgentConfig,
    DegenerateTransform,
    SingularTransform,
    TransformPair,
    WeightMatrix,
    apply_weight,
    build_jacobi,
    build_phi6,
    invert_3x3_closed_form,
    leading_minors,
    map_points,
    pair_from_forward,
)
from helpers import det_cofactor

S2 = np.sqrt(2.0)


def test_agent_config_validation():
    AgentConfig(n=2)
    with pytest.raises(ValueError):
        AgentConfig(n=1)
    with pytest.raises(ValueError):
        AgentConfig(n=3, masses=(1.0, 1.0))
    with pytest.raises(ValueError):
        AgentConfig(n=2, masses=(1.0, -1.0))


def test_jacobi_n3_unit_masses():
    # mu_1 = 1/2, mu_2 = 2/3 for unit masses
    pair = build_jacobi(AgentConfig(n=3))
    expected = np.array(
        [
            [-1 / S2, 1 / S2, 0.0],
            [-np.sqrt(2 / 3) / 2, -np.sqrt(2 / 3) / 2, np.sqrt(2 / 3)],
            [1 / 3, 1 / 3, 1 / 3],
        ]
    )
    assert_allclose(pair.forward, expected, atol=1e-15)


def test_jacobi_n2_unit_masses():
    pair = build_jacobi(AgentConfig(n=2))
    assert_allclose(pair.forward, np.array([[-1 / S2, 1 / S2], [0.5, 0.5]]), atol=1e-15)


def test_jacobi_n6_row_scales():
    pair = build_jacobi(AgentConfig(n=6))
    scales = [1 / np.sqrt(2), np.sqrt(2) / np.sqrt(3), np.sqrt(3) / 2, 2 / np.sqrt(5), np.sqrt(5) / np.sqrt(6)]
    for i, s in enumerate(scales):
        assert pair.forward[i, i + 1] == pytest.approx(s, abs=1e-15)
    assert_allclose(pair.forward[5], np.full(6, 1 / 6), atol=1e-15)


def test_jacobi_scale_override_matches_default():
    cfg = AgentConfig(n=4, masses=(2.0, 1.0, 3.0, 0.5))
    default = build_jacobi(cfg)
    mus = []
    m = np.array(cfg.masses)
    for i in range(1, 4):
        mus.append(np.sqrt(1.0 / (1.0 / m[:i].sum() + 1.0 / m[i])))
    overridden = build_jacobi(cfg, scales=mus)
    assert_allclose(default.forward, overridden.forward, atol=1e-15)


def test_jacobi_shape_rows_annihilate_translation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        masses = tuple(rng.uniform(0.2, 5.0, size=n))
        pair = build_jacobi(AgentConfig(n=n, masses=masses))
        ones = np.ones(n, dtype=complex)
        shape_rows = pair.forward[:-1] @ ones
        assert np.abs(shape_rows).max() <= 1e-12
        # centroid row is a convex combination
        assert abs(pair.forward[-1] @ ones - 1.0) <= 1e-12


def test_roundtrip_tolerance():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        pair = build_jacobi(AgentConfig(n=n, masses=tuple(rng.uniform(0.5, 2.0, size=n))))
        err = np.abs(pair.forward @ pair.inverse - np.eye(n)).max()
        assert err <= 1e-10


def test_phi6_entries_and_roundtrip():
    pair = build_phi6()
    assert pair.forward[0, 0] == pytest.approx(-1 / S2)
    assert_allclose(pair.forward[5], np.full(6, 1 / 6), atol=1e-15)
    assert_allclose(pair.forward[3], [-0.5, -0.5, 0.5, 0.5, 0.0, 0.0], atol=1e-15)
    assert_allclose(pair.forward[4], [0.25, 0.25, 0.25, 0.25, -0.5, -0.5], atol=1e-15)
    assert np.abs(pair.forward @ pair.inverse - np.eye(6)).max() <= 1e-10


def test_phi6_minors_match_cofactor_oracle():
    # the hierarchical pairing makes xi_2, xi_3 independent of agents 1-2,
    # so minors 2-4 of the inverse vanish and the pair is non-stabilizable
    pair = build_phi6()
    oracle = [det_cofactor(pair.inverse[:k, :k]) for k in range(1, 7)]
    assert_allclose(pair.minors, oracle, atol=1e-12)
    assert np.abs(pair.minors[1]) <= 1e-12
    assert not pair.stabilizable


def test_leading_minors_examples():
    assert_allclose(leading_minors(np.eye(4)), np.ones(4))
    assert_allclose(leading_minors(np.array([[2.0, 0.0], [5.0, 3.0]])), [2.0, 6.0])


def test_leading_minors_triangular_cumulative():
    rng = np.random.default_rng(3)
    diag = rng.uniform(0.5, 2.0, size=5) + 1j * rng.uniform(-1, 1, size=5)
    tri = np.triu(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    np.fill_diagonal(tri, diag)
    assert_allclose(leading_minors(tri), np.cumprod(diag), rtol=1e-12)


def test_closed_form_inverse_jacobi3():
    pair = build_jacobi(AgentConfig(n=3))
    closed = invert_3x3_closed_form(pair.forward)
    assert np.abs(closed - pair.inverse).max() <= 1e-9


def test_closed_form_inverse_diagonal():
    closed = invert_3x3_closed_form(np.diag([2.0, 3.0, 4.0]))
    assert_allclose(closed, np.diag([0.5, 1 / 3, 0.25]), atol=1e-15)


def test_closed_form_inverse_degenerate_cases():
    bad = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
    with pytest.raises(DegenerateTransform):
        invert_3x3_closed_form(bad)
    with pytest.raises(DegenerateTransform):
        invert_3x3_closed_form(np.ones((3, 3)))  # nonzero (1,3) entry


def test_closed_form_inverse_random_cbts():
    # 1000 well-conditioned CBT-shaped matrices against the LU route
    rng = np.random.default_rng(0)
    count = 0
    while count < 1000:
        phi = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        phi[0, 2] = 0.0
        if abs(np.linalg.det(phi)) < 0.3 or abs(phi[0, 0]) < 0.2:
            continue
        closed = invert_3x3_closed_form(phi)
        assert np.abs(closed - np.linalg.inv(phi)).max() <= 1e-9
        count += 1


def test_apply_weight_identity_weights():
    pair = build_jacobi(AgentConfig(n=3))
    weighted = apply_weight(pair, WeightMatrix(np.ones(3)))
    assert_allclose(weighted.forward, pair.forward, atol=1e-15)


def test_apply_weight_imaginary_identity():
    pair = pair_from_forward(np.eye(3))
    weighted = apply_weight(pair, WeightMatrix(np.full(3, 1j)))
    assert_allclose(weighted.forward, 1j * np.eye(3), atol=1e-15)
    assert_allclose(weighted.inverse, -1j * np.eye(3), atol=1e-15)


def test_apply_weight_scales_rows():
    pair = build_jacobi(AgentConfig(n=3))
    w = np.array([1 + 1j, 1.0, 1.0])
    weighted = apply_weight(pair, WeightMatrix(w))
    assert_allclose(weighted.forward[0], (1 + 1j) * pair.forward[0], atol=1e-15)
    assert np.abs(weighted.forward @ weighted.inverse - np.eye(3)).max() <= 1e-10


def test_apply_weight_rejects_zero():
    with pytest.raises(SingularTransform):
        WeightMatrix(np.array([1.0, 0.0, 1.0]))


def test_map_points_examples():
    pair = build_jacobi(AgentConfig(n=3))
    assert_allclose(map_points(pair, np.zeros(3)), np.zeros(3), atol=1e-15)
    # common translation lands entirely in the centroid coordinate
    xi = map_points(pair, np.ones(3))
    assert_allclose(xi, [0.0, 0.0, 1.0], atol=1e-12)
    rng = np.random.default_rng(1)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    back = map_points(pair, map_points(pair, z), direction="inverse")
    assert np.abs(back - z).max() <= 1e-10
    with pytest.raises(ValueError):
        map_points(pair, z, direction="sideways")


def test_singular_matrix_rejected():
    with pytest.raises(SingularTransform):
        pair_from_forward(np.ones((3, 3)))


def test_transform_pair_arrays_are_readonly():
    pair = build_jacobi(AgentConfig(n=3))
    with pytest.raises(ValueError):
        pair.forward[0, 0] = 0.0
