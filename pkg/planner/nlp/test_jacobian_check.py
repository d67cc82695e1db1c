"""
Tests for the analytic-versus-finite-difference Jacobian check
"""

import numpy as np
import pytest

from planner.model import ContactSchedule
from planner.nlp import Task, check_jacobians, transcribe
from planner.nlp.jacobian_check import relative_error
from planner.scenario import default_robot
from planner.terrain import Pallet, TerrainModel


@pytest.fixture(scope="module")
def problem():
    robot = default_robot()
    terrain = TerrainModel(Pallet(height_m=0.10, edge_x=0.5, ramp=0.05), force_cap=2.0 * robot.weight)
    task = Task(start=np.array([0.0, 0.0, 0.5]), goal=np.array([0.4, 0.0, 0.55]), final_time=2.4)
    schedule = ContactSchedule.crawl(robot.leg_names, 2.4, cycles=3, dt=0.1)
    return transcribe(robot, terrain, schedule, task)


@pytest.fixture(scope="module")
def report(problem):
    rng = np.random.default_rng(0)
    x = problem.x0 + 1e-2 * rng.standard_normal(problem.variable_count)
    return check_jacobians(problem, x)


def test_analytic_blocks_match(report):
    assert report.passed
    for name in ("position_defect", "linear_dynamics", "kinematic_box", "stance_terrain",
                 "swing_clearance", "friction_cone", "force_polytope", "lateral_force", "no_slip",
                 "orientation_defect", "angular_dynamics", "shin_clearance", "foot_radius"):
        check = report.block(name)
        assert check is not None and check.analytic, name
        assert check.max_rel_error < 1e-5, name


def test_linear_blocks_are_exact(report):
    assert report.block("linear_dynamics").max_rel_error < 1e-8
    assert report.block("position_defect").max_rel_error < 1e-8


def test_every_block_has_an_analytic_jacobian(problem):
    assert [block.label for block in problem.blocks if block.jacobian is None] == []


def test_mismatch_is_detected(problem):
    block = next(b for b in problem.blocks if b.name == "stance_terrain")
    original = block.jacobian
    block.jacobian = lambda z: 2.0 * original(z)
    try:
        report = check_jacobians(problem, problem.x0)
    finally:
        block.jacobian = original
    assert not report.passed
    assert report.block("stance_terrain").max_rel_error >= 1e-5


def test_relative_error():
    assert relative_error(np.array([[1.0, 2.0]]), np.array([[1.0, 2.0]])) == 0.0
    assert relative_error(np.array([[10.0]]), np.array([[12.0]])) == pytest.approx(2.0 / 12.0)
    assert relative_error(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0
