"""
Constraint residuals of the planning problem and the ConstraintBlock container.

All residual functions are pure and work in physical units (m, N). The
transcription wraps them into ConstraintBlocks over slices of the decision
vector.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from planner.model import LegModel, RobotModel, rotation_matrix, rotation_matrix_derivatives, yaw_heading
from planner.polytope import lateral_force_bound, morphed_polytope, polytope_constraint_jacobian
from planner.terrain import TerrainModel

INF = np.inf

Residual = Callable[[np.ndarray], np.ndarray]


@dataclass
class ConstraintBlock:
    """
    Residual rows over a slice of the decision vector.

    `indices` selects the block's local variables; `residual` and `jacobian`
    receive them in physical units. `scale` divides rows and bounds.
    """

    name: str
    indices: np.ndarray
    residual: Residual
    lower: np.ndarray
    upper: np.ndarray
    jacobian: Optional[Residual] = None
    scale: float = 1.0
    knot: Optional[int] = None
    leg: Optional[str] = None
    near_kink: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError(f"block {self.name}: bound shapes differ")
        if np.any(self.lower > self.upper):
            raise ValueError(f"block {self.name}: lower bound above upper bound")

    @property
    def size(self) -> int:
        return self.lower.size

    @property
    def label(self) -> str:
        parts = [self.name]
        if self.knot is not None:
            parts.append(f"k={self.knot}")
        if self.leg is not None:
            parts.append(self.leg)
        return " ".join(parts)

    def violation(self, values: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.maximum(self.lower - values, values - self.upper))


def equality(size: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.zeros(size), np.zeros(size)


# ============================================================================
# Kinematics
# ============================================================================

def kinematic_box_residual(p: Sequence[float], r: Sequence[float], theta: Sequence[float],
                           leg: LegModel) -> np.ndarray:
    """Base-frame foot position minus the nominal foot; bounded by +-b"""
    rot = rotation_matrix(theta)
    return rot.T @ (np.asarray(p) - np.asarray(r)) - np.asarray(leg.nominal_foot)


def kinematic_box_jacobian(p: Sequence[float], r: Sequence[float],
                           theta: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(d/dp, d/dr, d/dtheta)"""
    rot = rotation_matrix(theta)
    lever = np.asarray(p) - np.asarray(r)
    dtheta = np.column_stack([d.T @ lever for d in rotation_matrix_derivatives(theta)])
    return rot.T, -rot.T, dtheta


def kinematic_box_bounds(model: RobotModel) -> Tuple[np.ndarray, np.ndarray]:
    b = model.box_half_edge
    return np.full(3, -b), np.full(3, b)


# ============================================================================
# Terrain contact
# ============================================================================

def stance_terrain_residual(p: Sequence[float], terrain: TerrainModel) -> float:
    return float(p[2] - terrain.height(p[0], p[1]))


def swing_clearance_residual(p: Sequence[float], terrain: TerrainModel) -> float:
    return float(p[2] - terrain.height(p[0], p[1]) - terrain.min_clearance)


def height_gap_jacobian(p: Sequence[float], terrain: TerrainModel) -> np.ndarray:
    """Gradient of p_z - h(p_x, p_y) w.r.t. p"""
    hx, hy = terrain.gradient(p[0], p[1])
    return np.array([-hx, -hy, 1.0])


def friction_cone_matrix(p: Sequence[float], terrain: TerrainModel) -> np.ndarray:
    s, t1, t2 = terrain.frame(p[0], p[1])
    mu = terrain.friction
    return np.array([
        -mu * s + t1,
        -mu * s + t2,
        mu * s + t2,
        mu * s + t1,
        s,
    ])


def friction_cone_residual(f: Sequence[float], terrain: TerrainModel,
                           p: Sequence[float] = (0.0, 0.0, 0.0)) -> np.ndarray:
    """Linearised friction pyramid rows C f, bounded by friction_cone_bounds"""
    return friction_cone_matrix(p, terrain) @ np.asarray(f, dtype=float)


def friction_cone_bounds(terrain: TerrainModel) -> Tuple[np.ndarray, np.ndarray]:
    lower = np.array([-INF, -INF, 0.0, 0.0, 0.0])
    upper = np.array([0.0, 0.0, INF, INF, terrain.force_cap])
    return lower, upper


def friction_cone_jacobian(f: Sequence[float], p: Sequence[float],
                           terrain: TerrainModel, step: float = 1e-6) -> Tuple[np.ndarray, np.ndarray]:
    """(d/df, d/dp); the terrain-frame part is differenced numerically"""
    f = np.asarray(f, dtype=float)
    p = np.asarray(p, dtype=float)
    dp = np.zeros((5, 3))
    for axis in range(2):
        shift = np.zeros(3)
        shift[axis] = step
        dp[:, axis] = (friction_cone_matrix(p + shift, terrain) @ f
                       - friction_cone_matrix(p - shift, terrain) @ f) / (2 * step)
    return friction_cone_matrix(p, terrain), dp


# ============================================================================
# Force polytope
# ============================================================================

def sagittal_force(f: Sequence[float], yaw: float) -> np.ndarray:
    """(f_x', f_z, f_lat): force in the heading-aligned vertical plane plus the lateral part"""
    c, s = math.cos(yaw), math.sin(yaw)
    fx, fy, fz = f
    return np.array([fx * c + fy * s, fz, -fx * s + fy * c])


def sagittal_force_jacobian(f: Sequence[float], yaw: float) -> Tuple[np.ndarray, np.ndarray]:
    """(d/df, d/dyaw)"""
    c, s = math.cos(yaw), math.sin(yaw)
    fx, fy, _ = f
    df = np.array([[c, s, 0.0], [0.0, 0.0, 1.0], [-s, c, 0.0]])
    dyaw = np.array([-fx * s + fy * c, 0.0, -fx * c - fy * s])
    return df, dyaw


def force_polytope_residual(p_base: Sequence[float], f: Sequence[float], leg_index: int,
                            model: RobotModel) -> np.ndarray:
    """A(p) f - d(p) for the sagittal force f = (f_x', f_z); upper bound 0"""
    return morphed_polytope(p_base, leg_index, model).residual(np.asarray(f, dtype=float)[:2])


def force_polytope_world(p: Sequence[float], r: Sequence[float], theta: Sequence[float],
                         f: Sequence[float], leg_index: int, model: RobotModel) -> np.ndarray:
    """Polytope rows from world-frame quantities"""
    leg = model.legs[leg_index]
    p_base = kinematic_box_residual(p, r, theta, leg) + leg.nominal_foot
    return force_polytope_residual(p_base, sagittal_force(f, theta[2])[:2], leg_index, model)


def force_polytope_world_jacobian(p, r, theta, f, leg_index: int,
                                  model: RobotModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(d/dp, d/dr, d/dtheta, d/df) of force_polytope_world"""
    leg = model.legs[leg_index]
    p_base = kinematic_box_residual(p, r, theta, leg) + leg.nominal_foot
    projected = sagittal_force(f, theta[2])
    dg_dpb, dg_dfs = polytope_constraint_jacobian(p_base, projected[:2], leg_index, model)
    dpb_dp, dpb_dr, dpb_dtheta = kinematic_box_jacobian(p, r, theta)
    dfs_df, dfs_dyaw = sagittal_force_jacobian(f, theta[2])

    dtheta = dg_dpb @ dpb_dtheta
    dtheta[:, 2] += dg_dfs @ dfs_dyaw[:2]
    return dg_dpb @ dpb_dp, dg_dpb @ dpb_dr, dtheta, dg_dfs @ dfs_df[:2]


def lateral_force_residual(f: Sequence[float], yaw: float) -> float:
    return float(sagittal_force(f, yaw)[2])


def lateral_force_bounds(leg: LegModel) -> Tuple[np.ndarray, np.ndarray]:
    bound = lateral_force_bound(leg)
    return np.array([-bound]), np.array([bound])


# ============================================================================
# Leg geometry versus terrain
# ============================================================================

def foot_radius_safety(p: Sequence[float], yaw: float, terrain: TerrainModel, radius: float) -> np.ndarray:
    """Height differences at +-radius along the heading; both must be zero"""
    p = np.asarray(p, dtype=float)
    heading = yaw_heading(yaw) * radius
    centre = terrain.height(p[0], p[1])
    ahead = p + heading
    behind = p - heading
    return np.array([
        terrain.height(ahead[0], ahead[1]) - centre,
        terrain.height(behind[0], behind[1]) - centre,
    ])


def foot_radius_jacobian(p: Sequence[float], yaw: float, terrain: TerrainModel,
                         radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dyaw, d/dp) of foot_radius_safety, shapes (2,) and (2, 3)"""
    p = np.asarray(p, dtype=float)
    heading = yaw_heading(yaw) * radius
    turn = radius * np.array([-math.sin(yaw), math.cos(yaw)])
    centre = np.array(terrain.gradient(p[0], p[1]))
    d_yaw = np.zeros(2)
    d_p = np.zeros((2, 3))
    for row, sign in enumerate((1.0, -1.0)):
        point = p + sign * heading
        slope = np.array(terrain.gradient(point[0], point[1]))
        d_p[row, :2] = slope - centre
        d_yaw[row] = sign * slope @ turn
    return d_yaw, d_p


def knee_point(p: Sequence[float], yaw: float, shin_length: float, shin_angle: float) -> np.ndarray:
    direction = np.array([
        math.cos(shin_angle) * math.cos(yaw),
        math.cos(shin_angle) * math.sin(yaw),
        math.sin(shin_angle),
    ])
    return np.asarray(p, dtype=float) + shin_length * direction


def shin_points(p: Sequence[float], yaw: float, shin_length: float, shin_angle: float,
                n_probe: int) -> np.ndarray:
    """Knee first, then the probes at fractions k/(n_probe+1) from the foot"""
    p = np.asarray(p, dtype=float)
    knee = knee_point(p, yaw, shin_length, shin_angle)
    fractions = np.arange(1, n_probe + 1) / (n_probe + 1)
    probes = p[None, :] + fractions[:, None] * (knee - p)[None, :]
    return np.vstack([knee[None, :], probes])


def shin_clearance_residual(p: Sequence[float], yaw: float, terrain: TerrainModel, model: RobotModel,
                            leg_index: int, n_probe: int = 2) -> np.ndarray:
    """Clearance of the knee and the shin probes above the terrain; each row >= 0"""
    leg = model.legs[leg_index]
    points = shin_points(p, yaw, model.shin_length, leg.shin_angle, n_probe)
    heights = np.asarray(terrain.height(points[:, 0], points[:, 1]), dtype=float)
    return points[:, 2] - heights


def shin_clearance_jacobian(p: Sequence[float], yaw: float, terrain: TerrainModel, model: RobotModel,
                            leg_index: int, n_probe: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dyaw, d/dp) of shin_clearance_residual, shapes (n_probe+1,) and (n_probe+1, 3)"""
    leg = model.legs[leg_index]
    points = shin_points(p, yaw, model.shin_length, leg.shin_angle, n_probe)
    reach = np.concatenate([[1.0], np.arange(1, n_probe + 1) / (n_probe + 1)]) * model.shin_length
    turn = math.cos(leg.shin_angle) * np.array([-math.sin(yaw), math.cos(yaw)])
    d_yaw = np.zeros(len(points))
    d_p = np.zeros((len(points), 3))
    for row, (point, length) in enumerate(zip(points, reach)):
        slope = np.array(terrain.gradient(point[0], point[1]))
        d_p[row] = [-slope[0], -slope[1], 1.0]
        d_yaw[row] = -length * slope @ turn
    return d_yaw, d_p
