"""
Tests for exact and morphed force polytopes and the polytope constraint Jacobian
"""

import itertools
import math
import warnings

import numpy as np
import pytest

from planner.errors import DegenerateFoot, KinkWarning, SingularConfiguration
from planner.kinematics import PlanarLeg, leg_ik, leg_jacobian
from planner.polytope import (
    HalfspacePolytope,
    PolarFootCoord,
    compare_polytopes,
    exact_force_polytope,
    lateral_force_bound,
    morph,
    morph_normal,
    morph_offset,
    morphed_polytope,
    polar_coords,
    polytope_constraint_jacobian,
    polytope_from_jacobian,
    rotation_2d,
    select_neighbors,
)
from planner.scenario import default_robot

FREE = (-math.pi, math.pi)


@pytest.fixture(scope="module")
def robot():
    return default_robot()


def oracle_leg(knee_forward=False):
    return PlanarLeg(upper=0.35, lower=0.35, hip=np.zeros(3), joint_limits=(FREE, FREE),
                     dofs=2, knee_forward=knee_forward)


def _vertical_foot(leg, length, alpha=0.0):
    return np.asarray(leg.hip, dtype=float) + np.array([length * math.sin(alpha), 0.0, -length * math.cos(alpha)])


# ============================================================================
# Exact polytope
# ============================================================================

def test_identity_jacobian_gives_torque_box():
    poly = polytope_from_jacobian(np.eye(2), [1.0, 1.0])
    assert poly.count == 4
    assert np.allclose(poly.offsets, 1.0)
    assert poly.contains([0.5, -0.9])
    assert not poly.contains([1.1, 0.0])


def test_enumerated_vertices_lie_on_the_boundary():
    leg = PlanarLeg(upper=0.35, lower=0.33, hip=np.zeros(3), joint_limits=(FREE, FREE))
    q = [-0.5, 1.0]
    tau = np.array([150.0, 150.0])
    poly = exact_force_polytope(q, leg, tau)
    assert poly.count == 4
    jacobian = leg_jacobian(q, leg)
    for signs in itertools.product((-1.0, 1.0), repeat=2):
        vertex = np.linalg.solve(jacobian.T, np.array(signs) * tau)
        residual = poly.residual(vertex)
        assert np.all(residual <= 1e-8)
        assert np.sum(np.abs(residual) <= 1e-8) >= 2
        # beyond the vertex is outside
        assert np.any(poly.residual(1.5 * vertex) > 0)


def test_torque_scaling_scales_offsets():
    leg = oracle_leg()
    q = [-0.4, 1.1]
    base = exact_force_polytope(q, leg, [150.0, 150.0]).sorted_by_angle()
    doubled = exact_force_polytope(q, leg, [300.0, 300.0]).sorted_by_angle()
    assert np.allclose(doubled.normals, base.normals, atol=1e-12)
    assert np.allclose(doubled.offsets, 2.0 * base.offsets, rtol=1e-9)


def test_singular_configuration():
    with pytest.raises(SingularConfiguration):
        exact_force_polytope([0.0, 0.0], oracle_leg(), [150.0, 150.0])


def test_halfspace_requires_unit_normals():
    with pytest.raises(ValueError):
        HalfspacePolytope(np.array([[2.0, 0.0]]), np.array([1.0]))


# ============================================================================
# Polar coordinates and neighbours
# ============================================================================

def test_polar_coords_examples():
    hip = np.array([0.37, 0.21, 0.0])
    below = polar_coords(hip + [0.0, 0.0, -0.58], hip)
    assert below.l == pytest.approx(0.58)
    assert below.alpha == pytest.approx(0.0)

    diagonal = polar_coords(hip + [0.1, 0.0, -0.1], hip)
    assert diagonal.l == pytest.approx(0.1 * math.sqrt(2))
    assert diagonal.alpha == pytest.approx(math.pi / 4)

    behind = polar_coords(hip + [-0.2, 0.05, -0.55], hip)
    assert behind.alpha < 0
    rebuilt = hip + np.array([behind.l * math.sin(behind.alpha), 0.05, -behind.l * math.cos(behind.alpha)])
    assert np.allclose(rebuilt, hip + [-0.2, 0.05, -0.55])


def test_polar_coords_degenerate():
    with pytest.raises(DegenerateFoot):
        polar_coords([0.1, 0.0, -1e-7], [0.1, 0.0, 0.0])


def test_select_neighbors(robot):
    predefined = robot.leg("LF").polytopes
    l1, l2, l3 = predefined.distances
    assert select_neighbors(l1, predefined) == (0, 1)
    assert select_neighbors(l2, predefined) == (0, 1)
    assert select_neighbors(0.5 * (l2 + l3), predefined) == (1, 2)
    assert select_neighbors(l3, predefined) == (1, 2)
    # clamped
    assert select_neighbors(0.1, predefined) == (0, 1)
    assert select_neighbors(0.9, predefined) == (1, 2)


# ============================================================================
# Morphing
# ============================================================================

def test_predefined_polytopes_share_facet_count(robot):
    for leg in robot.legs:
        assert leg.polytopes.row_count == 4
        assert leg.polytopes.angles.shape == (3, 4)


def test_morph_exact_at_predefined_distances(robot):
    for name in ("LF", "LH"):
        leg = robot.leg(name)
        chain = leg.sagittal_leg()
        for length in leg.polytopes.distances:
            for alpha in (0.0, 0.3, -0.25):
                p_base = _vertical_foot(leg, length, alpha)
                morphed = morphed_polytope(p_base, robot.leg_index(name), robot)
                exact = exact_force_polytope(leg_ik(p_base, chain), chain, leg.torque_limits[1:])
                angle_dev, offset_dev = compare_polytopes(morphed, exact)
                assert angle_dev < 1e-7
                assert offset_dev < 1e-9


def test_morph_nominal_equals_predefined_rows(robot):
    leg = robot.leg("RF")
    predefined = leg.polytopes
    coord = PolarFootCoord(predefined.nominal_distance, 0.0)
    morphed = morph(coord, predefined)
    row_angles = predefined.angles[predefined.nominal_index]
    assert np.allclose(morphed.normals, np.column_stack([np.cos(row_angles), np.sin(row_angles)]), atol=1e-12)
    assert np.allclose(morphed.offsets, predefined.offsets[predefined.nominal_index], atol=1e-12)


def test_morph_normal_and_offset_interpolate(robot):
    predefined = robot.leg("LF").polytopes
    l1, l2, _ = predefined.distances
    for row in range(predefined.row_count):
        mid = morph_normal(PolarFootCoord(0.5 * (l1 + l2), 0.0), row, predefined)
        angle = 0.5 * (predefined.angles[0, row] + predefined.angles[1, row])
        assert np.allclose(mid, [math.cos(angle), math.sin(angle)], atol=1e-12)

        quarter = morph_offset(PolarFootCoord(l1 + 0.25 * (l2 - l1), 0.0), row, predefined)
        d_a, d_b = predefined.offsets[0, row], predefined.offsets[1, row]
        assert quarter == pytest.approx(d_a + 0.25 * (d_b - d_a))

        tilted = morph_normal(PolarFootCoord(l1, 0.3), row, predefined)
        assert np.linalg.norm(tilted) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(tilted, rotation_2d(0.3) @ morph_normal(PolarFootCoord(l1, 0.0), row, predefined))


def test_morph_rotation_equivariance(robot):
    predefined = robot.leg("LH").polytopes
    upright = morph(PolarFootCoord(0.45, 0.0), predefined)
    tilted = morph(PolarFootCoord(0.45, 0.2), predefined)
    assert np.allclose(tilted.normals, upright.normals @ rotation_2d(0.2).T)
    assert np.allclose(tilted.offsets, upright.offsets)


def test_morph_clamps_distance(robot):
    predefined = robot.leg("LF").polytopes
    far = morph(PolarFootCoord(0.69, 0.1), predefined)
    edge = morph(PolarFootCoord(predefined.distances[-1], 0.1), predefined)
    assert np.allclose(far.normals, edge.normals)
    assert np.allclose(far.offsets, edge.offsets)


def test_morph_approximation_between_samples(robot):
    """Between the predefined distances the morph is an approximation, not exact"""
    leg = robot.leg("LF")
    chain = leg.sagittal_leg()
    l1, l2, _ = leg.polytopes.distances
    p_base = _vertical_foot(leg, 0.5 * (l1 + l2))
    morphed = morphed_polytope(p_base, robot.leg_index("LF"), robot)
    exact = exact_force_polytope(leg_ik(p_base, chain), chain, leg.torque_limits[1:])
    angle_dev, offset_dev = compare_polytopes(morphed, exact)
    assert math.isfinite(angle_dev) and math.isfinite(offset_dev)
    assert angle_dev < 15.0
    assert offset_dev < 0.25


def test_force_scaling_keeps_membership(robot):
    predefined = robot.leg("LF").polytopes
    poly = morph(PolarFootCoord(0.55, 0.1), predefined)
    assert np.all(poly.offsets > 0)
    force = np.array([20.0, 150.0])
    assert poly.contains(force)
    for scale in (0.0, 0.3, 0.9):
        assert poly.contains(scale * force)


# ============================================================================
# Jacobian
# ============================================================================

def _residual(p_base, force, i, robot):
    return morphed_polytope(p_base, i, robot).residual(force)


def test_polytope_jacobian_matches_finite_differences(robot):
    rng = np.random.default_rng(42)
    step = 1e-6
    checked = 0
    while checked < 100:
        i = int(rng.integers(robot.leg_count))
        leg = robot.legs[i]
        length = rng.uniform(0.39, 0.65)
        if abs(length - leg.polytopes.distances[1]) < 1e-3:
            continue
        p_base = _vertical_foot(leg, length, rng.uniform(-0.4, 0.4))
        p_base[1] += rng.uniform(-0.05, 0.05)
        force = rng.uniform(-200.0, 200.0, 2) + np.array([0.0, 200.0])

        dg_dp, dg_df = polytope_constraint_jacobian(p_base, force, i, robot)
        numeric = np.empty_like(dg_dp)
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = step
            numeric[:, axis] = (_residual(p_base + shift, force, i, robot)
                                - _residual(p_base - shift, force, i, robot)) / (2 * step)
        scale = max(1.0, np.max(np.abs(numeric)))
        assert np.max(np.abs(dg_dp - numeric)) / scale < 1e-5
        assert np.allclose(dg_df, morphed_polytope(p_base, i, robot).normals)
        checked += 1


def test_polytope_jacobian_without_force_is_offset_slope(robot):
    leg = robot.leg("RH")
    i = robot.leg_index("RH")
    p_base = _vertical_foot(leg, 0.58, 0.1)
    dg_dp, _ = polytope_constraint_jacobian(p_base, np.zeros(2), i, robot)
    step = 1e-6
    shift = np.array([step, 0.0, 0.0])
    offsets_ahead = morphed_polytope(p_base + shift, i, robot).offsets
    offsets_behind = morphed_polytope(p_base - shift, i, robot).offsets
    assert np.allclose(dg_dp[:, 0], -(offsets_ahead - offsets_behind) / (2 * step), atol=1e-5)


def test_polytope_jacobian_warns_at_kink(robot):
    leg = robot.leg("LF")
    p_base = _vertical_foot(leg, leg.polytopes.distances[1])
    with pytest.warns(KinkWarning):
        polytope_constraint_jacobian(p_base, np.array([0.0, 100.0]), 0, robot)


def test_polytope_jacobian_quiet_away_from_kink(robot):
    leg = robot.leg("LF")
    with warnings.catch_warnings():
        warnings.simplefilter("error", KinkWarning)
        polytope_constraint_jacobian(_vertical_foot(leg, 0.45), np.array([0.0, 100.0]), 0, robot)


def test_lateral_force_bound(robot):
    assert lateral_force_bound(robot.leg("LF")) == pytest.approx(120.0 / 0.5)
