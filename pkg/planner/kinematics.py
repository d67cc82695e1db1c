"""
Leg kinematics: forward/inverse kinematics and analytic Jacobians.

Sagittal chain (HFE q1, KFE q2), zero angles mean the leg points straight down:
    knee = hip + L1 (sin q1, -cos q1)
    foot = knee + L2 (sin(q1+q2), -cos(q1+q2))
The three-joint leg prepends HAA (q0), a rotation about the base x axis applied
to the sagittal chain.
"""

import math
from dataclasses import dataclass
from typing import Literal, Sequence, Tuple

import numpy as np

from planner.errors import Unreachable

ReachTolerance = 1e-12

Point = Literal["foot", "knee"]


@dataclass(frozen=True)
class PlanarLeg:
    """Serial leg with two (sagittal) or three (HAA + sagittal) joints"""

    upper: float
    lower: float
    hip: np.ndarray
    joint_limits: Tuple[Tuple[float, float], ...]
    dofs: int = 2
    knee_forward: bool = False

    def __post_init__(self):
        if self.upper <= 0 or self.lower <= 0:
            raise ValueError("link lengths must be positive")
        if self.dofs not in (2, 3):
            raise ValueError("dofs must be 2 or 3")
        if len(self.joint_limits) != self.dofs:
            raise ValueError(f"expected {self.dofs} joint limit pairs")
        for low, high in self.joint_limits:
            if low >= high:
                raise ValueError(f"joint limits ({low}, {high}) are not ordered")

    @property
    def reach(self) -> Tuple[float, float]:
        return abs(self.upper - self.lower), self.upper + self.lower

    def sagittal_hip(self) -> np.ndarray:
        hip = np.asarray(self.hip, dtype=float)
        return np.array([hip[0], hip[-1]])


# ----------------------------------------------------------------------------
# Sagittal chain helpers (relative to hip)
# ----------------------------------------------------------------------------

def _sagittal_point(q1: float, q2: float, upper: float, lower: float) -> np.ndarray:
    return np.array([
        upper * math.sin(q1) + lower * math.sin(q1 + q2),
        -upper * math.cos(q1) - lower * math.cos(q1 + q2),
    ])


def _sagittal_jacobian(q1: float, q2: float, upper: float, lower: float) -> np.ndarray:
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q1 + q2), math.sin(q1 + q2)
    return np.array([
        [upper * c1 + lower * c12, lower * c12],
        [upper * s1 + lower * s12, lower * s12],
    ])


def _sagittal_ik(x: float, z: float, leg: PlanarLeg) -> Tuple[float, float]:
    length = math.hypot(x, z)
    low, high = leg.reach
    if length < low - ReachTolerance or length > high + ReachTolerance:
        raise Unreachable(
            f"hip-to-foot distance {length:.6f} m outside reachable annulus [{low:.6f}, {high:.6f}]"
        )
    cos_knee = (length**2 - leg.upper**2 - leg.lower**2) / (2.0 * leg.upper * leg.lower)
    q2 = math.acos(float(np.clip(cos_knee, -1.0, 1.0)))
    if leg.knee_forward:
        q2 = -q2
    alpha = math.atan2(x, -z)
    q1 = alpha - math.atan2(leg.lower * math.sin(q2), leg.upper + leg.lower * math.cos(q2))
    return q1, q2


def _check_limits(q: np.ndarray, leg: PlanarLeg) -> None:
    for value, (low, high) in zip(q, leg.joint_limits):
        if value < low or value > high:
            raise Unreachable(f"joint angle {value:.4f} rad outside limits [{low}, {high}]")


# ----------------------------------------------------------------------------
# Public API
# ----------------------------------------------------------------------------

def leg_point(q: Sequence[float], leg: PlanarLeg, point: Point = "foot") -> np.ndarray:
    """Position of the foot or knee in the base frame (2-vector x, z for a 2-DoF leg)"""
    q = np.asarray(q, dtype=float)
    lower = leg.lower if point == "foot" else 0.0
    if leg.dofs == 2:
        return leg.sagittal_hip() + _sagittal_point(q[0], q[1], leg.upper, lower)

    x, z = _sagittal_point(q[1], q[2], leg.upper, lower)
    c0, s0 = math.cos(q[0]), math.sin(q[0])
    return np.asarray(leg.hip, dtype=float) + np.array([x, -s0 * z, c0 * z])


def leg_fk(q: Sequence[float], leg: PlanarLeg) -> np.ndarray:
    return leg_point(q, leg, "foot")


def leg_ik(p_base: Sequence[float], leg: PlanarLeg) -> np.ndarray:
    """
    Joint angles placing the foot at p_base.

    The knee branch is fixed per leg: knee_forward legs bend with q_KFE < 0.
    Raises Unreachable outside the annulus [|L1-L2|, L1+L2] or the joint limits.
    """
    p = np.asarray(p_base, dtype=float)
    if leg.dofs == 2:
        if p.shape[0] == 3:
            p = np.array([p[0], p[2]])
        dx, dz = p - leg.sagittal_hip()
        q = np.array(_sagittal_ik(dx, dz, leg))
    else:
        dx, dy, dz = p - np.asarray(leg.hip, dtype=float)
        haa = math.atan2(dy, -dz)
        q1, q2 = _sagittal_ik(dx, -math.hypot(dy, dz), leg)
        q = np.array([haa, q1, q2])
    _check_limits(q, leg)
    return q


def point_jacobian(q: Sequence[float], leg: PlanarLeg, point: Point = "foot") -> np.ndarray:
    """Analytic Jacobian of a leg point w.r.t. the joint angles"""
    q = np.asarray(q, dtype=float)
    lower = leg.lower if point == "foot" else 0.0
    if leg.dofs == 2:
        return _sagittal_jacobian(q[0], q[1], leg.upper, lower)

    x, z = _sagittal_point(q[1], q[2], leg.upper, lower)
    planar = _sagittal_jacobian(q[1], q[2], leg.upper, lower)
    c0, s0 = math.cos(q[0]), math.sin(q[0])
    jac = np.zeros((3, 3))
    jac[:, 0] = [0.0, -c0 * z, -s0 * z]
    jac[0, 1:] = planar[0]
    jac[1, 1:] = -s0 * planar[1]
    jac[2, 1:] = c0 * planar[1]
    return jac


def leg_jacobian(q: Sequence[float], leg: PlanarLeg) -> np.ndarray:
    return point_jacobian(q, leg, "foot")


def jacobian_rate(q: Sequence[float], qd: Sequence[float], leg: PlanarLeg,
                  point: Point = "foot", step: float = 1e-6) -> np.ndarray:
    """Time derivative of the point Jacobian along qd (central difference)"""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    ahead = point_jacobian(q + step * qd, leg, point)
    behind = point_jacobian(q - step * qd, leg, point)
    return (ahead - behind) / (2.0 * step)
