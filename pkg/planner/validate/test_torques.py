"""
Tests for the joint-torque replay
"""

import math

import numpy as np
import pytest

from planner.errors import Unreachable
from planner.model import ContactSchedule
from planner.nlp import Task, transcribe
from planner.scenario import build_robot
from planner.schema import LegMasses, RobotConfig
from planner.terrain import FlatGround, TerrainModel
from planner.validate import torque_replay
from planner.validate.torques import JOINTS


def static_stand(robot):
    terrain = TerrainModel(FlatGround(), force_cap=2.0 * robot.weight)
    task = Task(start=np.array([0.0, 0.0, 0.5]), goal=np.array([0.0, 0.0, 0.5]), final_time=1.0)
    problem = transcribe(robot, terrain, ContactSchedule.stand(robot.leg_names, 1.0), task)
    return problem.to_trajectory(problem.x0)


@pytest.fixture(scope="module")
def massless_robot():
    return build_robot(RobotConfig(leg_masses=LegMasses(knee_fraction=0.0, foot_fraction=0.0)))


def test_static_stand_matches_statics(massless_robot):
    """Foot under the hip, vertical load F: only the knee works, |tau| = F sqrt(4 L^2 - l^2) / 2"""
    report = torque_replay(static_stand(massless_robot), massless_robot)
    load = massless_robot.weight / 4
    knee = load * math.sqrt(4 * 0.35**2 - 0.5**2) / 2
    for leg in massless_robot.leg_names:
        hfe = np.array(report.series[f"{leg}_HFE"])
        kfe = np.array(report.series[f"{leg}_KFE"])
        haa = np.array(report.series[f"{leg}_HAA"])
        assert np.allclose(haa, 0.0, atol=1e-6)
        assert np.allclose(hfe, 0.0, atol=1e-6)
        assert np.allclose(np.abs(kfe), knee, rtol=1e-6)
        # constant over time
        assert np.ptp(kfe) < 1e-6
    assert report.passed
    assert not report.exceeded


def test_hind_and_front_knees_push_opposite_ways(massless_robot):
    report = torque_replay(static_stand(massless_robot), massless_robot)
    front = report.series["LF_KFE"][0]
    hind = report.series["LH_KFE"][0]
    assert front * hind < 0


def test_unloaded_legs_carry_only_their_weight():
    robot = build_robot(RobotConfig())
    trajectory = static_stand(robot)
    trajectory.forces[:] = 0.0
    report = torque_replay(trajectory, robot)
    for joint in report.joints:
        assert joint.max_abs < 10.0


def test_report_lists_every_joint(massless_robot):
    report = torque_replay(static_stand(massless_robot), massless_robot)
    assert len(report.joints) == 4 * len(JOINTS)
    assert len(report.times) == 11
    for joint in report.joints:
        assert 0.0 <= joint.violation_fraction <= 1.0


def test_overload_is_reported(massless_robot):
    trajectory = static_stand(massless_robot)
    trajectory.forces[:, :, 2] *= 4.0
    report = torque_replay(trajectory, massless_robot)
    knees = [j for j in report.joints if j.joint == "KFE"]
    load = 4.0 * massless_robot.weight / 4
    expected = load * math.sqrt(4 * 0.35**2 - 0.5**2) / 2
    assert expected > 150.0
    assert all(j.violation_fraction == 1.0 and not j.minor_only for j in knees)
    assert report.exceeded and not report.passed


def test_unreachable_foot(massless_robot):
    trajectory = static_stand(massless_robot)
    trajectory.feet[5, 0, 2] = -1.0
    with pytest.raises(Unreachable):
        torque_replay(trajectory, massless_robot)
