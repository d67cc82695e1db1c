"""
Tests for the feasibility and foothold audits
"""

import numpy as np
import pytest

from planner.model import ContactSchedule
from planner.nlp import Task, transcribe
from planner.scenario import default_robot
from planner.terrain import FlatGround, Pallet, TerrainModel
from planner.validate import feasibility_audit, foothold_audit


@pytest.fixture(scope="module")
def robot():
    return default_robot()


@pytest.fixture(scope="module")
def standing(robot):
    terrain = TerrainModel(FlatGround(), force_cap=2.0 * robot.weight)
    task = Task(start=np.array([0.0, 0.0, 0.5]), goal=np.array([0.0, 0.0, 0.5]), final_time=1.0)
    return transcribe(robot, terrain, ContactSchedule.stand(robot.leg_names, 1.0), task)


def test_initial_stand_passes(standing):
    report = feasibility_audit(standing, standing.to_trajectory(standing.x0))
    assert report.max_violation <= 1e-6
    assert report.swing_force_knots == []
    assert "stance_terrain" in report.block_maxima


def test_lifted_stance_foot_is_reported(standing):
    trajectory = standing.to_trajectory(standing.x0)
    trajectory.feet[5, 0, 2] += 0.05
    report = feasibility_audit(standing, trajectory)
    assert report.block_maxima["stance_terrain"] == pytest.approx(0.05, abs=1e-9)
    # height is held by stance_terrain alone
    assert report.block_maxima["no_slip"] == pytest.approx(0.0, abs=1e-9)
    assert report.max_violation == pytest.approx(0.05, abs=1e-9)
    assert report.worst_block is not None


def test_swing_forces_are_listed(robot):
    terrain = TerrainModel(FlatGround(), force_cap=2.0 * robot.weight)
    task = Task(start=np.array([0.0, 0.0, 0.5]), goal=np.array([1.0, 0.0, 0.5]), final_time=2.4)
    schedule = ContactSchedule.crawl(robot.leg_names, 2.4, cycles=3, dt=0.1)
    problem = transcribe(robot, terrain, schedule, task)
    trajectory = problem.to_trajectory(problem.x0)
    swing = ~trajectory.stance_mask()
    k, i = np.argwhere(swing)[0]
    trajectory.forces[k, i] = [0.0, 0.0, 50.0]
    report = feasibility_audit(problem, trajectory)
    assert report.swing_force_knots


def test_flat_footholds_are_clean(robot, standing):
    trajectory = standing.to_trajectory(standing.x0)
    assert foothold_audit(trajectory, TerrainModel(FlatGround()), robot) == []


def test_foot_next_to_an_edge_is_flagged(robot, standing):
    # front feet 1 cm short of the step, within the 2 cm foot radius
    trajectory = standing.to_trajectory(standing.x0)
    terrain = TerrainModel(Pallet(height_m=0.10, edge_x=0.38))
    issues = foothold_audit(trajectory, terrain, robot)
    assert {issue.leg for issue in issues} == {"LF", "RF"}
    assert len(issues) == 2 * trajectory.knot_count
    ahead, behind = issues[0].height_gaps
    assert ahead == pytest.approx(0.10)
    assert behind == pytest.approx(0.0)
