"""
Sharp-terrain collision sweep over the foot, the shin probes and the knee.
"""

from typing import List

import numpy as np

from planner.constraints import shin_points
from planner.model import RobotModel, Trajectory
from planner.schema import Penetration
from planner.terrain import TerrainModel

PENETRATION_TOL = 1e-6


def _samples(trajectory: Trajectory, substeps: int):
    """(time, feet, yaw) by linear interpolation between knots"""
    last = trajectory.knot_count - 1
    for k in range(last):
        for s in range(substeps):
            frac = s / substeps
            feet = (1.0 - frac) * trajectory.feet[k] + frac * trajectory.feet[k + 1]
            yaw = (1.0 - frac) * trajectory.theta[k, 2] + frac * trajectory.theta[k + 1, 2]
            yield (k + frac) * trajectory.dt, feet, yaw
    yield last * trajectory.dt, trajectory.feet[last], trajectory.theta[last, 2]


def collision_sweep(trajectory: Trajectory, terrain: TerrainModel, model: RobotModel,
                    substeps: int = 1, n_probe: int = 2) -> List[Penetration]:
    """All points below the sharp terrain by more than 1e-6 m"""
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    sharp = terrain.as_sharp()
    labels = ["knee"] + [f"probe{j}" for j in range(1, n_probe + 1)] + ["foot"]
    found: List[Penetration] = []

    for t, feet, yaw in _samples(trajectory, substeps):
        for i, leg in enumerate(model.legs):
            points = np.vstack([shin_points(feet[i], yaw, model.shin_length, leg.shin_angle, n_probe), feet[i]])
            depth = np.asarray(sharp.height(points[:, 0], points[:, 1]), dtype=float) - points[:, 2]
            for label, point, d in zip(labels, points, depth):
                if d > PENETRATION_TOL:
                    found.append(Penetration(
                        time=float(t), leg=leg.name, point=label, depth=float(d),
                        position=tuple(float(v) for v in point),
                    ))
    return found
