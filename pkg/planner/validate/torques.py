"""
Joint-torque replay of a planned trajectory.

Joint angles come from inverse kinematics of the base-frame foot path,
rates and accelerations from finite differences. Each leg is a fixed-base
chain with point masses at the knee and the foot:
    tau = sum_j m_j J_j^T (J_j qdd + Jd_j qd - g_B) - J_foot^T f_B
"""

import logging
from typing import List

import numpy as np

from planner.errors import Unreachable
from planner.kinematics import PlanarLeg, jacobian_rate, leg_ik, point_jacobian
from planner.model import GRAVITY, LegModel, RobotModel, Trajectory, rotation_matrix
from planner.schema import JointTorque, TorqueReport

logger = logging.getLogger(__name__)

JOINTS = ("HAA", "HFE", "KFE")
BRANCH_JUMP = 1.0  # rad between consecutive knots


def joint_path(trajectory: Trajectory, leg_index: int, chain: PlanarLeg) -> np.ndarray:
    """Joint angles at every knot; raises Unreachable on an unreachable foot or a knee flip"""
    q = np.empty((trajectory.knot_count, 3))
    for k in range(trajectory.knot_count):
        rot = rotation_matrix(trajectory.theta[k])
        p_base = rot.T @ (trajectory.feet[k, leg_index] - trajectory.r[k])
        q[k] = leg_ik(p_base, chain)
    jumps = np.abs(np.diff(q, axis=0))
    if jumps.size and np.max(jumps) > BRANCH_JUMP:
        k = int(np.argmax(np.max(jumps, axis=1)))
        raise Unreachable(f"joint path of leg {trajectory.leg_names[leg_index]} jumps between knots {k} and {k + 1}")
    return q


def leg_torque(q: np.ndarray, qd: np.ndarray, qdd: np.ndarray, force_base: np.ndarray,
               gravity_base: np.ndarray, leg: LegModel, chain: PlanarLeg) -> np.ndarray:
    tau = np.zeros(3)
    for point, mass in (("knee", leg.knee_mass), ("foot", leg.foot_mass)):
        if mass <= 0:
            continue
        jac = point_jacobian(q, chain, point)
        acceleration = jac @ qdd + jacobian_rate(q, qd, chain, point) @ qd
        tau += mass * jac.T @ (acceleration - gravity_base)
    return tau - point_jacobian(q, chain, "foot").T @ force_base


def torque_replay(trajectory: Trajectory, model: RobotModel, minor_violation: float = 0.05) -> TorqueReport:
    """Per-knot joint torques compared against the limits"""
    dt = trajectory.dt
    joints: List[JointTorque] = []
    series = {}

    for i, leg in enumerate(model.legs):
        chain = leg.spatial_leg()
        q = joint_path(trajectory, i, chain)
        if trajectory.knot_count > 1:
            qd = np.gradient(q, dt, axis=0)
            qdd = np.gradient(qd, dt, axis=0)
        else:
            qd = np.zeros_like(q)
            qdd = np.zeros_like(q)

        tau = np.empty_like(q)
        for k in range(trajectory.knot_count):
            rot = rotation_matrix(trajectory.theta[k])
            tau[k] = leg_torque(q[k], qd[k], qdd[k], rot.T @ trajectory.forces[k, i], rot.T @ GRAVITY, leg, chain)

        for j, joint in enumerate(JOINTS):
            limit = float(leg.torque_limits[j])
            magnitude = np.abs(tau[:, j])
            max_abs = float(np.max(magnitude))
            joints.append(JointTorque(
                leg=leg.name,
                joint=joint,
                max_abs=max_abs,
                limit=limit,
                violation_fraction=float(np.mean(magnitude > limit)),
                minor_only=max_abs <= (1.0 + minor_violation) * limit,
            ))
            series[f"{leg.name}_{joint}"] = tau[:, j].tolist()
            if max_abs > limit:
                logger.info("%s %s peaks at %.1f N m (limit %.0f)", leg.name, joint, max_abs, limit)

    return TorqueReport(joints=joints, times=trajectory.times.tolist(), series=series)
