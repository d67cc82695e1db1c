"""
Robot, contact schedule and trajectory types plus the Single Rigid Body Dynamics residuals.
Orientation uses ZYX Euler angles theta = (roll, pitch, yaw) with R = Rz(yaw) Ry(pitch) Rx(roll).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from planner.errors import ConfigError, GimbalLock, InfeasibleSchedule
from planner.kinematics import PlanarLeg

if TYPE_CHECKING:
    from planner.polytope import PredefinedPolytopes

GRAVITY = np.array([0.0, 0.0, -9.81])
GIMBAL_MARGIN = 1e-6

# Swing order of the crawl gait
CRAWL_ORDER = ("LH", "LF", "RH", "RF")

PhaseKind = Literal["stance", "swing"]


# ============================================================================
# Rotations
# ============================================================================

def rotation_matrix(theta: Sequence[float]) -> np.ndarray:
    """Base-to-world rotation for ZYX Euler angles (roll, pitch, yaw)"""
    roll, pitch, yaw = theta
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def rotation_matrix_derivatives(theta: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of rotation_matrix w.r.t. roll, pitch and yaw"""
    roll, pitch, yaw = theta
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)

    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    drz = np.array([[-sy, -cy, 0.0], [cy, -sy, 0.0], [0.0, 0.0, 0.0]])
    dry = np.array([[-sp, 0.0, cp], [0.0, 0.0, 0.0], [-cp, 0.0, -sp]])
    drx = np.array([[0.0, 0.0, 0.0], [0.0, -sr, -cr], [0.0, cr, -sr]])

    return rz @ ry @ drx, rz @ dry @ rx, drz @ ry @ rx


def euler_rate_map(theta: Sequence[float]) -> np.ndarray:
    """
    Matrix E(theta) with omega = E(theta) @ theta_dot.

    omega is the angular velocity expressed in the world frame.
    Raises GimbalLock when the pitch is within 1e-6 rad of +-pi/2.
    """
    _, pitch, yaw = theta
    if abs(abs(pitch) - math.pi / 2) < GIMBAL_MARGIN:
        raise GimbalLock(f"pitch {pitch:.9f} rad is at the ZYX Euler singularity")

    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([
        [cy * cp, -sy, 0.0],
        [sy * cp, cy, 0.0],
        [-sp, 0.0, 1.0],
    ])


def euler_rate_map_derivatives(theta: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of euler_rate_map w.r.t. roll, pitch and yaw"""
    _, pitch, yaw = theta
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    d_pitch = np.array([
        [-cy * sp, 0.0, 0.0],
        [-sy * sp, 0.0, 0.0],
        [-cp, 0.0, 0.0],
    ])
    d_yaw = np.array([
        [-sy * cp, -cy, 0.0],
        [cy * cp, -sy, 0.0],
        [0.0, 0.0, 0.0],
    ])
    return np.zeros((3, 3)), d_pitch, d_yaw


def yaw_heading(yaw: float) -> np.ndarray:
    """Horizontal unit vector along the body heading"""
    return np.array([math.cos(yaw), math.sin(yaw), 0.0])


# ============================================================================
# Robot
# ============================================================================

@dataclass(frozen=True)
class LegModel:
    """One leg: placement in the base frame, limits, geometry and predefined polytopes"""

    name: str
    hip: np.ndarray
    nominal_foot: np.ndarray
    torque_limits: np.ndarray  # HAA, HFE, KFE
    upper_link: float
    lower_link: float
    shin_angle: float  # beta, rad
    knee_forward: bool
    polytopes: "PredefinedPolytopes"
    knee_mass: float = 0.0
    foot_mass: float = 0.0
    joint_limits: Tuple[Tuple[float, float], ...] = (
        (-math.pi, math.pi),
        (-math.pi, math.pi),
        (-math.pi, math.pi),
    )

    def spatial_leg(self) -> PlanarLeg:
        """Three-joint (HAA, HFE, KFE) leg used by the torque oracle"""
        return PlanarLeg(
            upper=self.upper_link,
            lower=self.lower_link,
            hip=np.asarray(self.hip, dtype=float),
            joint_limits=self.joint_limits,
            dofs=3,
            knee_forward=self.knee_forward,
        )

    def sagittal_leg(self) -> PlanarLeg:
        """Two-joint (HFE, KFE) leg in the sagittal plane"""
        return PlanarLeg(
            upper=self.upper_link,
            lower=self.lower_link,
            hip=np.asarray(self.hip, dtype=float),
            joint_limits=self.joint_limits[1:],
            dofs=2,
            knee_forward=self.knee_forward,
        )


@dataclass(frozen=True)
class RobotModel:
    """Single rigid body with massless legs"""

    mass: float
    inertia: np.ndarray
    legs: Tuple[LegModel, ...]
    box_half_edge: float
    shin_length: float
    foot_radius: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigError("mass must be positive")
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T):
            raise ConfigError("inertia must be a symmetric 3x3 matrix")
        if np.min(np.linalg.eigvalsh(inertia)) <= 0:
            raise ConfigError("inertia must be positive definite")
        if self.box_half_edge <= 0:
            raise ConfigError("box_half_edge must be positive")
        if self.foot_radius < 0:
            raise ConfigError("foot_radius must be non-negative")
        if self.shin_length <= 0:
            raise ConfigError("shin_length must be positive")
        for leg in self.legs:
            if np.any(np.asarray(leg.torque_limits) <= 0):
                raise ConfigError(f"torque limits of leg {leg.name} must be strictly positive")
        names = [leg.name for leg in self.legs]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate leg names: {names}")

    @property
    def leg_count(self) -> int:
        return len(self.legs)

    @property
    def leg_names(self) -> Tuple[str, ...]:
        return tuple(leg.name for leg in self.legs)

    @property
    def weight(self) -> float:
        return self.mass * float(-GRAVITY[2])

    def leg(self, name: str) -> LegModel:
        for leg in self.legs:
            if leg.name == name:
                return leg
        raise KeyError(f"robot has no leg '{name}'")

    def leg_index(self, name: str) -> int:
        return self.leg_names.index(name)


# ============================================================================
# Dynamics
# ============================================================================

@dataclass
class KnotState:
    """Quantities at one knot needed by the dynamics residuals"""

    r: np.ndarray
    feet: np.ndarray  # (legs, 3) world frame
    forces: np.ndarray  # (legs, 3)
    rdd: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))


def srbd_linear_residual(state: KnotState, model: RobotModel) -> np.ndarray:
    """m*rdd - sum(f_i) - m*g; zero when the linear dynamics hold"""
    total_force = np.sum(np.atleast_2d(state.forces), axis=0)
    return model.mass * np.asarray(state.rdd) - total_force - model.mass * GRAVITY


def world_inertia(model: RobotModel, theta: Sequence[float]) -> np.ndarray:
    rot = rotation_matrix(theta)
    return rot @ np.asarray(model.inertia) @ rot.T


def srbd_angular_residual(state: KnotState, model: RobotModel) -> np.ndarray:
    """I*omega_dot + omega x (I*omega) - sum(f_i x (r - p_i)), world frame"""
    inertia = world_inertia(model, state.theta)
    omega = np.asarray(state.omega)
    lever = np.asarray(state.r)[None, :] - np.atleast_2d(state.feet)
    moment = np.sum(np.cross(np.atleast_2d(state.forces), lever), axis=0)
    return inertia @ np.asarray(state.omega_dot) + np.cross(omega, inertia @ omega) - moment


def skew(v: Sequence[float]) -> np.ndarray:
    """Matrix with skew(a) @ b == a x b"""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass
class AngularJacobian:
    """Derivatives of srbd_angular_residual, one (3, 3) block per argument"""

    theta: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    r: np.ndarray
    feet: np.ndarray  # (legs, 3, 3)
    forces: np.ndarray  # (legs, 3, 3)


def srbd_angular_jacobian(state: KnotState, model: RobotModel) -> AngularJacobian:
    rot = rotation_matrix(state.theta)
    body = np.asarray(model.inertia)
    inertia = rot @ body @ rot.T
    omega = np.asarray(state.omega)
    omega_dot = np.asarray(state.omega_dot)

    d_theta = np.zeros((3, 3))
    for a, d_rot in enumerate(rotation_matrix_derivatives(state.theta)):
        d_inertia = d_rot @ body @ rot.T + rot @ body @ d_rot.T
        d_theta[:, a] = d_inertia @ omega_dot + np.cross(omega, d_inertia @ omega)

    feet = np.atleast_2d(state.feet)
    forces = np.atleast_2d(state.forces)
    force_skews = np.array([skew(f) for f in forces]).reshape(-1, 3, 3)
    lever_skews = np.array([skew(np.asarray(state.r) - p) for p in feet]).reshape(-1, 3, 3)
    return AngularJacobian(
        theta=d_theta,
        omega=skew(omega) @ inertia - skew(inertia @ omega),
        omega_dot=inertia,
        r=-force_skews.sum(axis=0),
        feet=force_skews,
        forces=lever_skews,
    )


# ============================================================================
# Contact schedule
# ============================================================================

@dataclass(frozen=True)
class Phase:
    start: float
    end: float
    kind: PhaseKind


@dataclass(frozen=True)
class ContactSchedule:
    """
    Per-leg ordered phases partitioning [0, final_time].

    A leg is in swing at time t iff t lies strictly inside one of its swing
    phases; lift-off and touch-down instants count as stance.
    """

    final_time: float
    phases: Dict[str, Tuple[Phase, ...]]

    def __post_init__(self):
        tol = 1e-9
        for leg, phases in self.phases.items():
            if not phases:
                raise InfeasibleSchedule(f"leg {leg} has no phases")
            if abs(phases[0].start) > tol or abs(phases[-1].end - self.final_time) > tol:
                raise InfeasibleSchedule(f"phases of leg {leg} do not cover [0, {self.final_time}]")
            for prev, nxt in zip(phases, phases[1:]):
                if abs(prev.end - nxt.start) > tol:
                    raise InfeasibleSchedule(
                        f"phases of leg {leg} leave a gap or overlap at t={prev.end:.6f}"
                    )
            for phase in phases:
                if phase.end < phase.start - tol:
                    raise InfeasibleSchedule(f"phase of leg {leg} ends before it starts")

    @property
    def legs(self) -> Tuple[str, ...]:
        return tuple(self.phases)

    def in_swing(self, leg: str, t: float) -> bool:
        tol = 1e-9
        return any(
            phase.kind == "swing" and phase.start + tol < t < phase.end - tol
            for phase in self.phases[leg]
        )

    def in_stance(self, leg: str, t: float) -> bool:
        return not self.in_swing(leg, t)

    def stance_mask(self, times: Sequence[float], legs: Sequence[str]) -> np.ndarray:
        """Boolean (knots, legs) array, True where the leg is in stance"""
        return np.array([[self.in_stance(leg, t) for leg in legs] for t in times], dtype=bool)

    def stance_intervals(self, leg: str) -> List[Tuple[float, float]]:
        return [(p.start, p.end) for p in self.phases[leg] if p.kind == "stance"]

    # ------------------------------------------------------------------
    # Gait generators
    # ------------------------------------------------------------------

    @classmethod
    def stand(cls, legs: Sequence[str], final_time: float) -> "ContactSchedule":
        return cls(final_time, {leg: (Phase(0.0, final_time, "stance"),) for leg in legs})

    @classmethod
    def from_swing_windows(
        cls, legs: Sequence[str], final_time: float, windows: Dict[str, List[Tuple[float, float]]]
    ) -> "ContactSchedule":
        """Fill the time between given swing windows with stance"""
        phases: Dict[str, Tuple[Phase, ...]] = {}
        for leg in legs:
            cursor = 0.0
            leg_phases: List[Phase] = []
            for start, end in sorted(windows.get(leg, [])):
                if start > cursor:
                    leg_phases.append(Phase(cursor, start, "stance"))
                leg_phases.append(Phase(start, end, "swing"))
                cursor = end
            if cursor < final_time:
                leg_phases.append(Phase(cursor, final_time, "stance"))
            phases[leg] = tuple(leg_phases)
        return cls(final_time, phases)

    @classmethod
    def crawl(
        cls,
        legs: Sequence[str],
        final_time: float,
        cycles: int,
        dt: float,
        order: Sequence[str] = CRAWL_ORDER,
    ) -> "ContactSchedule":
        """One leg in swing at a time; slot boundaries are snapped to the knot grid"""
        swing_order = [leg for leg in order if leg in legs]
        if cycles < 1 or not swing_order:
            raise InfeasibleSchedule("crawl needs at least one cycle and one swinging leg")
        intervals = int(round(final_time / dt))
        slots = cycles * len(swing_order)
        bounds = [int(round(j * intervals / slots)) for j in range(slots + 1)]

        windows: Dict[str, List[Tuple[float, float]]] = {leg: [] for leg in legs}
        for s in range(slots):
            if bounds[s + 1] - bounds[s] < 2:
                raise InfeasibleSchedule(
                    f"crawl slot {s} spans {bounds[s + 1] - bounds[s]} knot interval(s); "
                    "a swing needs at least one interior knot"
                )
            leg = swing_order[s % len(swing_order)]
            windows[leg].append((bounds[s] * dt, bounds[s + 1] * dt))
        return cls.from_swing_windows(legs, final_time, windows)

    @classmethod
    def hop(
        cls,
        legs: Sequence[str],
        final_time: float,
        cycles: int,
        dt: float,
        flight_fraction: float = 0.5,
    ) -> "ContactSchedule":
        """All legs alternate stance and flight, starting and ending in stance"""
        if cycles < 1 or not 0.0 < flight_fraction < 1.0:
            raise InfeasibleSchedule("hop needs at least one cycle and a flight fraction in (0, 1)")
        intervals = int(round(final_time / dt))
        cycle = intervals / cycles
        windows: List[Tuple[float, float]] = []
        for c in range(cycles):
            # flight centred in its cycle
            start = int(round((c + 0.5 - flight_fraction / 2) * cycle))
            end = int(round((c + 0.5 + flight_fraction / 2) * cycle))
            if end - start < 2:
                raise InfeasibleSchedule("flight phase needs at least one interior knot")
            windows.append((start * dt, end * dt))
        return cls.from_swing_windows(legs, final_time, {leg: list(windows) for leg in legs})


# ============================================================================
# Trajectory
# ============================================================================

@dataclass
class Trajectory:
    """Knot-indexed motion; arrays are (knots, 3) or (knots, legs, 3)"""

    dt: float
    schedule: ContactSchedule
    leg_names: Tuple[str, ...]
    r: np.ndarray
    rd: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    feet: np.ndarray
    forces: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        expected = int(round(self.schedule.final_time / self.dt)) + 1
        for name in ("r", "rd", "theta", "omega"):
            if getattr(self, name).shape != (expected, 3):
                raise ValueError(f"{name} must have shape ({expected}, 3)")
        for name in ("feet", "forces"):
            if getattr(self, name).shape != (expected, len(self.leg_names), 3):
                raise ValueError(f"{name} must have shape ({expected}, {len(self.leg_names)}, 3)")

    @property
    def final_time(self) -> float:
        return self.schedule.final_time

    @property
    def knot_count(self) -> int:
        return self.r.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.knot_count) * self.dt

    def stance_mask(self) -> np.ndarray:
        return self.schedule.stance_mask(self.times, self.leg_names)

    def swing_force_violations(self, tol: float = 0.0) -> List[Tuple[int, str]]:
        """(knot, leg) pairs where a swing leg carries a nonzero force"""
        mask = self.stance_mask()
        bad = []
        for k in range(self.knot_count):
            for i, leg in enumerate(self.leg_names):
                if not mask[k, i] and np.max(np.abs(self.forces[k, i])) > tol:
                    bad.append((k, leg))
        return bad

    def knot_state(self, k: int, rdd: Optional[np.ndarray] = None,
                   omega_dot: Optional[np.ndarray] = None) -> KnotState:
        return KnotState(
            r=self.r[k],
            feet=self.feet[k],
            forces=self.forces[k],
            rdd=np.zeros(3) if rdd is None else rdd,
            theta=self.theta[k],
            omega=self.omega[k],
            omega_dot=np.zeros(3) if omega_dot is None else omega_dot,
        )
