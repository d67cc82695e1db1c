"""
Tests for the plotly figures
"""

import numpy as np

from planner.model import ContactSchedule
from planner.nlp import Task, transcribe
from planner.plots import create_base_figure, create_torque_figure, write_figure
from planner.scenario import default_robot
from planner.terrain import FlatGround, TerrainModel
from planner.validate import torque_replay


def _stand():
    robot = default_robot()
    terrain = TerrainModel(FlatGround(), force_cap=2.0 * robot.weight)
    task = Task(start=np.array([0.0, 0.0, 0.5]), goal=np.array([0.0, 0.0, 0.5]), final_time=1.0)
    problem = transcribe(robot, terrain, ContactSchedule.stand(robot.leg_names, 1.0), task)
    return robot, problem.to_trajectory(problem.x0)


def test_torque_figure_has_a_trace_per_joint():
    robot, trajectory = _stand()
    fig = create_torque_figure(torque_replay(trajectory, robot))
    assert len(fig.data) == 12
    # two limit lines per joint row
    assert len(fig.layout.shapes) == 6


def test_base_figure_and_html(tmp_path):
    _, trajectory = _stand()
    fig = create_base_figure(trajectory)
    assert list(fig.data[0].y) == list(trajectory.r[:, 0])
    path = write_figure(fig, tmp_path / "base_x.html")
    assert "<html>" in path.read_text()
