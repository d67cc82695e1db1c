"""
Solver-independent audits: every constraint block re-evaluated at a trajectory,
and the foot-radius rule checked on the sharp terrain.
"""

from typing import Dict, List

import numpy as np

from planner.constraints import foot_radius_safety
from planner.model import RobotModel, Trajectory
from planner.nlp.transcription import NlpProblem
from planner.schema import AuditReport, FootholdIssue
from planner.terrain import TerrainModel

FOOTHOLD_TOL = 1e-9


def feasibility_audit(problem: NlpProblem, trajectory: Trajectory) -> AuditReport:
    x = problem.from_trajectory(trajectory)
    maxima: Dict[str, float] = {}
    worst, worst_label = 0.0, None
    for block, value in problem.block_violations(x):
        maxima[block.name] = max(maxima.get(block.name, 0.0), value)
        if value > worst:
            worst, worst_label = value, block.label
    return AuditReport(
        max_violation=worst,
        worst_block=worst_label,
        block_maxima=maxima,
        swing_force_knots=trajectory.swing_force_violations(),
    )


def foothold_audit(trajectory: Trajectory, terrain: TerrainModel, model: RobotModel) -> List[FootholdIssue]:
    """Stance footholds whose sharp-terrain height differs at +-r along the heading"""
    if model.foot_radius <= 0:
        return []
    sharp = terrain.as_sharp()
    stance = trajectory.stance_mask()
    issues = []
    for k in range(trajectory.knot_count):
        for i, name in enumerate(trajectory.leg_names):
            if not stance[k, i]:
                continue
            gaps = foot_radius_safety(trajectory.feet[k, i], trajectory.theta[k, 2], sharp, model.foot_radius)
            if np.max(np.abs(gaps)) > FOOTHOLD_TOL:
                issues.append(FootholdIssue(knot=k, leg=name, height_gaps=(float(gaps[0]), float(gaps[1]))))
    return issues
