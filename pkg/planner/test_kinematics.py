"""
Tests for leg forward/inverse kinematics and Jacobians
"""

import math

import numpy as np
import pytest

from planner.errors import Unreachable
from planner.kinematics import PlanarLeg, jacobian_rate, leg_fk, leg_ik, leg_jacobian, leg_point, point_jacobian

FREE = (-math.pi, math.pi)


def sagittal(upper=0.35, lower=0.35, knee_forward=False, hip=(0.0, 0.0, 0.0)):
    return PlanarLeg(upper=upper, lower=lower, hip=np.array(hip), joint_limits=(FREE, FREE),
                     dofs=2, knee_forward=knee_forward)


def spatial(knee_forward=False, hip=(0.37, 0.21, 0.0)):
    return PlanarLeg(upper=0.35, lower=0.35, hip=np.array(hip), joint_limits=(FREE, FREE, FREE),
                     dofs=3, knee_forward=knee_forward)


def _random_reachable(rng, count, low=0.05, high=0.69):
    lengths = rng.uniform(low, high, count)
    angles = rng.uniform(-1.2, 1.2, count)
    return np.column_stack([lengths * np.sin(angles), -lengths * np.cos(angles)])


def test_zero_angles_point_straight_down():
    leg = sagittal()
    assert np.allclose(leg_fk([0.0, 0.0], leg), [0.0, -0.7])
    assert np.allclose(leg_point([0.0, 0.0], leg, "knee"), [0.0, -0.35])


def test_ik_fully_stretched():
    q = leg_ik([0.0, -0.7], sagittal())
    assert np.allclose(q, [0.0, 0.0], atol=1e-6)


def test_ik_round_trip_both_branches():
    rng = np.random.default_rng(0)
    points = _random_reachable(rng, 10_000)
    for knee_forward in (False, True):
        leg = sagittal(knee_forward=knee_forward)
        for p in points:
            q = leg_ik(p, leg)
            assert np.max(np.abs(leg_fk(q, leg) - p)) < 1e-9


def test_ik_knee_branch():
    p = [0.05, -0.5]
    assert leg_ik(p, sagittal(knee_forward=False))[1] > 0
    assert leg_ik(p, sagittal(knee_forward=True))[1] < 0


def test_ik_accepts_base_frame_three_vectors():
    leg = sagittal(hip=(0.37, 0.21, 0.0))
    q = leg_ik([0.4, 0.21, -0.5], leg)
    assert np.allclose(leg_fk(q, leg), [0.4, -0.5], atol=1e-12)


def test_ik_unreachable():
    with pytest.raises(Unreachable):
        leg_ik([0.0, -0.8], sagittal())
    with pytest.raises(Unreachable):
        leg_ik([0.0, -0.01], sagittal(upper=0.35, lower=0.30))


def test_ik_joint_limits():
    leg = PlanarLeg(upper=0.35, lower=0.35, hip=np.zeros(3), joint_limits=((-0.1, 0.1), (0.0, 3.0)))
    with pytest.raises(Unreachable):
        leg_ik([0.3, -0.4], leg)


def test_spatial_ik_round_trip():
    rng = np.random.default_rng(3)
    for knee_forward in (False, True):
        leg = spatial(knee_forward=knee_forward)
        for _ in range(500):
            p = leg.hip + np.array([rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1), rng.uniform(-0.6, -0.35)])
            q = leg_ik(p, leg)
            assert np.max(np.abs(leg_fk(q, leg) - p)) < 1e-9


def test_spatial_ik_abduction_angle():
    leg = spatial()
    q = leg_ik(leg.hip + np.array([0.0, 0.1, -0.5]), leg)
    assert q[0] == pytest.approx(math.atan2(0.1, 0.5))


def _numeric_jacobian(q, leg, point="foot", step=1e-7):
    q = np.asarray(q, dtype=float)
    columns = []
    for j in range(q.size):
        shift = np.zeros(q.size)
        shift[j] = step
        columns.append((leg_point(q + shift, leg, point) - leg_point(q - shift, leg, point)) / (2 * step))
    return np.column_stack(columns)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(11)
    for leg in (sagittal(upper=0.35, lower=0.33), spatial()):
        for _ in range(100):
            q = rng.uniform(-1.5, 1.5, leg.dofs)
            for point in ("foot", "knee"):
                numeric = _numeric_jacobian(q, leg, point)
                analytic = point_jacobian(q, leg, point)
                scale = max(1.0, np.max(np.abs(numeric)))
                assert np.max(np.abs(analytic - numeric)) / scale < 1e-6


def test_jacobian_singular_when_stretched():
    assert abs(np.linalg.det(leg_jacobian([0.0, 0.0], sagittal()))) < 1e-12


def test_jacobian_scales_with_link_lengths():
    q = [0.3, 0.8]
    small = leg_jacobian(q, sagittal(upper=0.35, lower=0.33))
    large = leg_jacobian(q, sagittal(upper=0.70, lower=0.66))
    assert np.allclose(large, 2.0 * small)


def test_jacobian_rate_vanishes_without_motion():
    assert np.allclose(jacobian_rate([0.2, 0.9], [0.0, 0.0], sagittal()), 0.0)


def test_leg_rejects_bad_geometry():
    with pytest.raises(ValueError):
        PlanarLeg(upper=0.0, lower=0.35, hip=np.zeros(3), joint_limits=(FREE, FREE))
    with pytest.raises(ValueError):
        PlanarLeg(upper=0.35, lower=0.35, hip=np.zeros(3), joint_limits=(FREE,))
