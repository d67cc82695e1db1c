"""
Transcription of a planning task into a sparse nonlinear program.

Knots are spaced dt apart. Explicit-Euler defects tie consecutive knots;
the dynamics residuals use finite-difference accelerations. Constraint rows
involving forces or moments are divided by the body weight, the force
variables are stored in units of body weight.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from planner.constraints import (
    ConstraintBlock,
    equality,
    foot_radius_jacobian,
    foot_radius_safety,
    force_polytope_world,
    force_polytope_world_jacobian,
    friction_cone_bounds,
    friction_cone_jacobian,
    friction_cone_residual,
    height_gap_jacobian,
    kinematic_box_bounds,
    kinematic_box_jacobian,
    kinematic_box_residual,
    lateral_force_bounds,
    lateral_force_residual,
    sagittal_force_jacobian,
    shin_clearance_jacobian,
    shin_clearance_residual,
    stance_terrain_residual,
    swing_clearance_residual,
)
from planner.errors import ConfigError, InfeasibleSchedule
from planner.model import (
    ContactSchedule,
    KnotState,
    RobotModel,
    Trajectory,
    euler_rate_map,
    euler_rate_map_derivatives,
    rotation_matrix,
    srbd_angular_jacobian,
    srbd_angular_residual,
    srbd_linear_residual,
)
from planner.nlp.layout import VariableLayout
from planner.polytope import polar_coords
from planner.schema import ConstraintToggles
from planner.terrain import TerrainModel

logger = logging.getLogger(__name__)

INF = np.inf
ATTITUDE_BOUND = 1.0  # rad, roll and pitch
SWING_APEX = 0.05  # above h_min
KINK_GUARD = 1e-5
KINK_MARGIN = 2.0 * KINK_GUARD  # m, initial footholds stay this far off the interpolation kinks
FOOT_RADIUS_BAND = 1e-4  # m, tolerance of the foot-radius rows


@dataclass(frozen=True)
class Task:
    start: np.ndarray
    goal: np.ndarray
    final_time: float
    dt: float = 0.1
    start_theta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    goal_theta: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def knot_count(self) -> int:
        return int(round(self.final_time / self.dt)) + 1


def central_difference(fn: Callable[[np.ndarray], np.ndarray], z: np.ndarray,
                       rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step rel_step * max(1, |z_j|)"""
    z = np.asarray(z, dtype=float)
    base = np.atleast_1d(fn(z))
    jac = np.empty((base.size, z.size))
    for j in range(z.size):
        step = rel_step * max(1.0, abs(z[j]))
        ahead = z.copy()
        behind = z.copy()
        ahead[j] += step
        behind[j] -= step
        jac[:, j] = (np.atleast_1d(fn(ahead)) - np.atleast_1d(fn(behind))) / (2.0 * step)
    return jac


@dataclass
class NlpProblem:
    model: RobotModel
    terrain: TerrainModel
    schedule: ContactSchedule
    task: Task
    toggles: ConstraintToggles
    layout: VariableLayout
    blocks: List[ConstraintBlock]
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    x0: np.ndarray
    regularizer_weight: float
    objective_matrix: sparse.csr_matrix
    objective_target: np.ndarray
    row_offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        sizes = [block.size for block in self.blocks]
        self.row_offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self._var_scale = self.layout.scales()

    # ------------------------------------------------------------------
    # Sizes and bounds
    # ------------------------------------------------------------------

    @property
    def variable_count(self) -> int:
        return self.layout.size

    @property
    def row_count(self) -> int:
        return int(self.row_offsets[-1])

    def constraint_lower(self) -> np.ndarray:
        return np.concatenate([block.lower / block.scale for block in self.blocks])

    def constraint_upper(self) -> np.ndarray:
        return np.concatenate([block.upper / block.scale for block in self.blocks])

    # ------------------------------------------------------------------
    # Objective
    # ------------------------------------------------------------------

    def objective(self, x: np.ndarray) -> float:
        res = self.objective_matrix @ x - self.objective_target
        return float(self.regularizer_weight * res @ res)

    def objective_gradient(self, x: np.ndarray) -> np.ndarray:
        res = self.objective_matrix @ x - self.objective_target
        return 2.0 * self.regularizer_weight * (self.objective_matrix.T @ res)

    def objective_hessian(self, x: Optional[np.ndarray] = None) -> sparse.csr_matrix:
        matrix = self.objective_matrix
        return (2.0 * self.regularizer_weight * (matrix.T @ matrix)).tocsr()

    # ------------------------------------------------------------------
    # Constraints
    # ------------------------------------------------------------------

    def local(self, block: ConstraintBlock, x: np.ndarray) -> np.ndarray:
        return x[block.indices] * self._var_scale[block.indices]

    def block_values(self, block: ConstraintBlock, x: np.ndarray) -> np.ndarray:
        """Scaled rows of one block"""
        return np.atleast_1d(block.residual(self.local(block, x))) / block.scale

    def constraints(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([self.block_values(block, x) for block in self.blocks])

    def local_jacobian(self, block: ConstraintBlock, x: np.ndarray) -> np.ndarray:
        z = self.local(block, x)
        if block.jacobian is not None:
            return np.atleast_2d(block.jacobian(z))
        return central_difference(block.residual, z)

    def jacobian(self, x: np.ndarray) -> sparse.csr_matrix:
        rows, cols, data = [], [], []
        for block, offset in zip(self.blocks, self.row_offsets):
            local = self.local_jacobian(block, x)
            local = local * self._var_scale[block.indices][None, :] / block.scale
            r, c = np.meshgrid(np.arange(block.size) + offset, block.indices, indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
            data.append(local.ravel())
        return sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.row_count, self.variable_count),
        )

    def sparsity(self) -> sparse.csr_matrix:
        rows, cols = [], []
        for block, offset in zip(self.blocks, self.row_offsets):
            r, c = np.meshgrid(np.arange(block.size) + offset, block.indices, indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
        rows = np.concatenate(rows)
        return sparse.csr_matrix(
            (np.ones(rows.size), (rows, np.concatenate(cols))),
            shape=(self.row_count, self.variable_count),
        )

    def block_violations(self, x: np.ndarray) -> List[Tuple[ConstraintBlock, float]]:
        result = []
        for block in self.blocks:
            values = self.block_values(block, x)
            worst = block.violation(values * block.scale) / block.scale
            result.append((block, float(np.max(worst)) if worst.size else 0.0))
        return result

    def max_violation(self, x: np.ndarray) -> Tuple[float, Optional[str]]:
        worst, label = 0.0, None
        for block, value in self.block_violations(x):
            if value > worst:
                worst, label = value, block.label
        return worst, label

    # ------------------------------------------------------------------
    # Trajectories
    # ------------------------------------------------------------------

    def to_trajectory(self, x: np.ndarray) -> Trajectory:
        parts = self.layout.unpack(x)
        return Trajectory(
            dt=self.task.dt,
            schedule=self.schedule,
            leg_names=self.model.leg_names,
            r=parts["r"],
            rd=parts["rd"],
            theta=parts["theta"],
            omega=parts["omega"],
            feet=parts["feet"],
            forces=parts["forces"],
        )

    def from_trajectory(self, trajectory: Trajectory) -> np.ndarray:
        if trajectory.knot_count != self.layout.knot_count:
            raise ValueError(
                f"trajectory has {trajectory.knot_count} knots, problem expects {self.layout.knot_count}"
            )
        return self.layout.pack(trajectory.r, trajectory.rd, trajectory.theta, trajectory.omega,
                                trajectory.feet, trajectory.forces)


# ============================================================================
# Transcription
# ============================================================================

class _BlockBuilder:
    """Collects blocks; index parts are concatenated into the block's local vector"""

    def __init__(self):
        self.blocks: List[ConstraintBlock] = []

    def add(self, name: str, parts: Sequence[np.ndarray], residual, bounds, jacobian=None,
            scale: float = 1.0, knot: Optional[int] = None, leg: Optional[str] = None, near_kink=None):
        lower, upper = bounds
        self.blocks.append(ConstraintBlock(
            name=name,
            indices=np.concatenate(parts),
            residual=residual,
            lower=lower,
            upper=upper,
            jacobian=jacobian,
            scale=scale,
            knot=knot,
            leg=leg,
            near_kink=near_kink,
        ))


def _check_schedule(schedule: ContactSchedule, model: RobotModel, task: Task) -> None:
    if abs(schedule.final_time - task.final_time) > 1e-9:
        raise InfeasibleSchedule(
            f"schedule ends at {schedule.final_time} s but the task lasts {task.final_time} s"
        )
    if abs(task.final_time / task.dt - round(task.final_time / task.dt)) > 1e-9:
        raise ConfigError(f"final time {task.final_time} is not a multiple of dt={task.dt}")
    missing = set(model.leg_names) - set(schedule.legs)
    if missing:
        raise InfeasibleSchedule(f"schedule has no phases for legs {sorted(missing)}")
    idle = [leg for leg in model.leg_names if not schedule.stance_intervals(leg)]
    if idle:
        raise InfeasibleSchedule(f"legs {idle} never touch the ground")

    times = np.arange(task.knot_count) * task.dt
    for leg in model.leg_names:
        for start, end in schedule.stance_intervals(leg):
            knots = int(np.sum((times >= start - 1e-9) & (times <= end + 1e-9)))
            if knots < 2:
                raise InfeasibleSchedule(
                    f"stance of leg {leg} in [{start:.3f}, {end:.3f}] s holds {knots} knot(s); at least 2 required"
                )


def _dynamics_blocks(builder: _BlockBuilder, layout: VariableLayout, model: RobotModel, task: Task) -> None:
    dt = task.dt
    mass = model.mass
    weight = model.weight
    eye = np.eye(3)

    def position_defect(z):
        return z[3:6] - z[0:3] - dt * z[6:9]

    position_jac = np.hstack([-eye, eye, -dt * eye])

    for k in range(layout.knot_count - 1):
        stance = layout.stance_legs(k)
        forces = [layout.force(k, i) for i in stance]

        builder.add("position_defect", [layout.base(k, "r"), layout.base(k + 1, "r"), layout.base(k, "rd")],
                    position_defect, equality(3), lambda z, j=position_jac: j, knot=k)

        def linear(z, n=len(stance)):
            state = KnotState(r=np.zeros(3), feet=np.zeros((n, 3)), forces=z[6:].reshape(n, 3),
                              rdd=(z[3:6] - z[0:3]) / dt)
            return srbd_linear_residual(state, model)

        linear_jac = np.hstack([-mass / dt * eye, mass / dt * eye] + [-eye] * len(stance))
        builder.add("linear_dynamics", [layout.base(k, "rd"), layout.base(k + 1, "rd")] + forces,
                    linear, equality(3), lambda z, j=linear_jac: j, scale=weight, knot=k)

        def orientation_defect(z):
            return euler_rate_map(z[0:3]) @ (z[3:6] - z[0:3]) / dt - z[6:9]

        def orientation_defect_jac(z):
            rate_map = euler_rate_map(z[0:3])
            step = (z[3:6] - z[0:3]) / dt
            d_now = np.column_stack([d @ step for d in euler_rate_map_derivatives(z[0:3])]) - rate_map / dt
            return np.hstack([d_now, rate_map / dt, -eye])

        builder.add("orientation_defect", [layout.base(k, "theta"), layout.base(k + 1, "theta"),
                                           layout.base(k, "omega")],
                    orientation_defect, equality(3), orientation_defect_jac, knot=k)

        def angular_state(z, n):
            contacts = z[12:].reshape(n, 6) if n else np.zeros((0, 6))
            return KnotState(
                r=z[9:12],
                feet=contacts[:, :3],
                forces=contacts[:, 3:],
                theta=z[0:3],
                omega=z[3:6],
                omega_dot=(z[6:9] - z[3:6]) / dt,
            )

        def angular(z, n=len(stance)):
            return srbd_angular_residual(angular_state(z, n), model)

        def angular_jac(z, n=len(stance)):
            d = srbd_angular_jacobian(angular_state(z, n), model)
            contact_cols = [np.hstack([d.feet[j], d.forces[j]]) for j in range(n)]
            return np.hstack([d.theta, d.omega - d.omega_dot / dt, d.omega_dot / dt, d.r] + contact_cols)

        contact_parts = []
        for i in stance:
            contact_parts += [layout.foot(k, i), layout.force(k, i)]
        builder.add("angular_dynamics", [layout.base(k, "theta"), layout.base(k, "omega"),
                                         layout.base(k + 1, "omega"), layout.base(k, "r")] + contact_parts,
                    angular, equality(3), angular_jac, scale=weight, knot=k)


def _boundary_blocks(builder: _BlockBuilder, layout: VariableLayout, task: Task) -> None:
    identity = np.eye(12)
    for k, r, theta, name in ((0, task.start, task.start_theta, "initial_state"),
                              (layout.knot_count - 1, task.goal, task.goal_theta, "final_state")):
        target = np.concatenate([r, np.zeros(3), theta, np.zeros(3)])
        builder.add(name, [layout.base(k, f) for f in ("r", "rd", "theta", "omega")],
                    lambda z: z, (target, target), lambda z: identity, knot=k)


def _leg_blocks(builder: _BlockBuilder, layout: VariableLayout, model: RobotModel, terrain: TerrainModel,
                schedule: ContactSchedule, task: Task, toggles: ConstraintToggles) -> None:
    weight = model.weight
    times = np.arange(layout.knot_count) * task.dt
    box_bounds = kinematic_box_bounds(model)
    no_slip_jac = np.hstack([-np.eye(3), np.eye(3)])[:2]
    radius_band = (np.full(2, -FOOT_RADIUS_BAND), np.full(2, FOOT_RADIUS_BAND))

    for i, leg in enumerate(model.legs):
        def box(z, leg=leg):
            return kinematic_box_residual(z[6:9], z[0:3], z[3:6], leg)

        def box_jac(z):
            dp, dr, dtheta = kinematic_box_jacobian(z[6:9], z[0:3], z[3:6])
            return np.hstack([dr, dtheta, dp])

        def near_kink(z, i=i, leg=leg):
            p_base = kinematic_box_residual(z[6:9], z[0:3], z[3:6], leg) + leg.nominal_foot
            length = polar_coords(p_base, leg.hip).l
            return bool(np.any(np.abs(length - leg.polytopes.distances[1:-1]) < KINK_GUARD))

        for k in range(layout.knot_count):
            r_idx, theta_idx, p_idx = layout.base(k, "r"), layout.base(k, "theta"), layout.foot(k, i)
            builder.add("kinematic_box", [r_idx, theta_idx, p_idx], box, box_bounds, box_jac, knot=k, leg=leg.name)

            if toggles.shin:
                builder.add(
                    "shin_clearance", [theta_idx, p_idx],
                    lambda z, i=i: shin_clearance_residual(z[3:6], z[2], terrain, model, i, toggles.n_probe),
                    (np.zeros(toggles.n_probe + 1), np.full(toggles.n_probe + 1, INF)),
                    lambda z, i=i: _yaw_foot_columns(
                        *shin_clearance_jacobian(z[3:6], z[2], terrain, model, i, toggles.n_probe)),
                    knot=k, leg=leg.name,
                )

            f_idx = layout.force(k, i)
            if f_idx is None:
                builder.add("swing_clearance", [p_idx],
                            lambda z: np.array([swing_clearance_residual(z, terrain)]),
                            (np.zeros(1), np.full(1, INF)),
                            lambda z: height_gap_jacobian(z, terrain)[None, :], knot=k, leg=leg.name)
                continue

            builder.add("stance_terrain", [p_idx],
                        lambda z: np.array([stance_terrain_residual(z, terrain)]), equality(1),
                        lambda z: height_gap_jacobian(z, terrain)[None, :], knot=k, leg=leg.name)

            if k + 1 < layout.knot_count and layout.force(k + 1, i) is not None \
                    and schedule.in_stance(leg.name, 0.5 * (times[k] + times[k + 1])):
                # z is already pinned by stance_terrain at both knots
                builder.add("no_slip", [p_idx, layout.foot(k + 1, i)], lambda z: z[3:5] - z[0:2], equality(2),
                            lambda z, j=no_slip_jac: j, knot=k, leg=leg.name)

            def friction_jac(z):
                df, dp = friction_cone_jacobian(z[3:6], z[0:3], terrain)
                return np.hstack([dp, df])

            builder.add("friction_cone", [p_idx, f_idx],
                        lambda z: friction_cone_residual(z[3:6], terrain, z[0:3]),
                        friction_cone_bounds(terrain), friction_jac, scale=weight, knot=k, leg=leg.name)

            if toggles.polytope:
                rows = leg.polytopes.row_count

                def polytope(z, i=i):
                    return force_polytope_world(z[6:9], z[0:3], z[3:6], z[9:12], i, model)

                def polytope_jac(z, i=i):
                    dp, dr, dtheta, df = force_polytope_world_jacobian(z[6:9], z[0:3], z[3:6], z[9:12], i, model)
                    return np.hstack([dr, dtheta, dp, df])

                builder.add("force_polytope", [r_idx, theta_idx, p_idx, f_idx], polytope,
                            (np.full(rows, -INF), np.zeros(rows)), polytope_jac, scale=weight,
                            knot=k, leg=leg.name, near_kink=near_kink)

                def lateral_jac(z):
                    df, dyaw = sagittal_force_jacobian(z[3:6], z[2])
                    return np.concatenate([[0.0, 0.0, dyaw[2]], df[2]])[None, :]

                builder.add("lateral_force", [theta_idx, f_idx],
                            lambda z: np.array([lateral_force_residual(z[3:6], z[2])]),
                            lateral_force_bounds(leg), lateral_jac, scale=weight, knot=k, leg=leg.name)

            if toggles.foot_radius and model.foot_radius > 0:
                builder.add("foot_radius", [theta_idx, p_idx],
                            lambda z: foot_radius_safety(z[3:6], z[2], terrain, model.foot_radius),
                            radius_band,
                            lambda z: _yaw_foot_columns(*foot_radius_jacobian(z[3:6], z[2], terrain, model.foot_radius)),
                            knot=k, leg=leg.name)


def _yaw_foot_columns(d_yaw: np.ndarray, d_p: np.ndarray) -> np.ndarray:
    """Jacobian over a [theta, p] block whose rows depend on yaw and the foot only"""
    jac = np.zeros((d_p.shape[0], 6))
    jac[:, 2] = d_yaw
    jac[:, 3:6] = d_p
    return jac


def _off_kink(point: np.ndarray, base: np.ndarray, rot: np.ndarray, leg, terrain: TerrainModel) -> np.ndarray:
    """
    Slide a foothold along the body x axis until the hip-foot distance clears
    every interior polytope sample. A foot under its hip moves away from the
    body centre, so symmetric stances stay balanced.
    """
    p_base = rot.T @ (point - base)
    length = polar_coords(p_base, leg.hip).l
    kinks = leg.polytopes.distances[1:-1]
    if not np.any(np.abs(length - kinks) < KINK_MARGIN):
        return point
    reach = p_base[0] - leg.hip[0]
    drop = p_base[2] - leg.hip[2]
    target = length + 2.0 * KINK_MARGIN
    shift = np.copysign(np.sqrt(max(target ** 2 - drop ** 2, 0.0)), reach if reach else (leg.hip[0] or 1.0)) - reach
    moved = point + rot @ np.array([shift, 0.0, 0.0])
    moved[2] = terrain.height(moved[0], moved[1])
    return moved


def _stance_footholds(model: RobotModel, terrain: TerrainModel, schedule: ContactSchedule,
                      times: np.ndarray, r: np.ndarray, theta: np.ndarray) -> Dict[str, List[Tuple[float, float, np.ndarray]]]:
    """Nominal foothold of every stance interval, under the base at the interval midpoint"""
    footholds = {}
    for leg in model.legs:
        entries = []
        for start, end in schedule.stance_intervals(leg.name):
            mid = 0.5 * (start + end)
            base = np.array([np.interp(mid, times, r[:, a]) for a in range(3)])
            attitude = np.array([np.interp(mid, times, theta[:, a]) for a in range(3)])
            rot = rotation_matrix(attitude)
            point = base + rot @ leg.nominal_foot
            point[2] = terrain.height(point[0], point[1])
            point = _off_kink(point, base, rot, leg, terrain)
            entries.append((start, end, point))
        footholds[leg.name] = entries
    return footholds


def initial_guess(model: RobotModel, terrain: TerrainModel, schedule: ContactSchedule, task: Task,
                  layout: VariableLayout) -> np.ndarray:
    """Linear CoM path, nominal footholds, triangular swing arcs and evenly shared weight"""
    n = layout.knot_count
    times = np.arange(n) * task.dt
    s = times / task.final_time
    r = task.start[None, :] + s[:, None] * (task.goal - task.start)[None, :]
    theta = task.start_theta[None, :] + s[:, None] * (task.goal_theta - task.start_theta)[None, :]
    rd = np.gradient(r, task.dt, axis=0) if n > 1 else np.zeros((n, 3))
    rd[0] = rd[-1] = 0.0
    omega = np.zeros((n, 3))

    footholds = _stance_footholds(model, terrain, schedule, times, r, theta)
    feet = np.zeros((n, model.leg_count, 3))
    forces = np.zeros((n, model.leg_count, 3))

    for i, leg in enumerate(model.legs):
        entries = footholds[leg.name]
        for k, t in enumerate(times):
            current = [point for start, end, point in entries if start - 1e-9 <= t <= end + 1e-9]
            if current and layout.stance[k, i]:
                feet[k, i] = current[0]
                continue
            before = [(end, point) for start, end, point in entries if end <= t]
            after = [(start, point) for start, end, point in entries if start >= t]
            lift_t, lift = before[-1] if before else (times[0], after[0][1])
            land_t, land = after[0] if after else (times[-1], lift)
            fraction = 0.0 if land_t <= lift_t else (t - lift_t) / (land_t - lift_t)
            point = lift + fraction * (land - lift)
            point[2] = terrain.height(point[0], point[1])
            if not layout.stance[k, i]:
                point[2] += terrain.min_clearance + SWING_APEX * (1.0 - abs(2.0 * fraction - 1.0))
            feet[k, i] = point

    for k in range(n):
        stance = layout.stance_legs(k)
        for i in stance:
            forces[k, i] = [0.0, 0.0, model.weight / len(stance)]

    return layout.pack(r, rd, theta, omega, feet, forces)


def _objective_terms(layout: VariableLayout, task: Task) -> Tuple[sparse.csr_matrix, np.ndarray]:
    """Residual rows A x - b of the regulariser w * |A x - b|^2"""
    rows, cols, vals, target = [], [], [], []
    row = 0
    for k in range(layout.knot_count):
        stance = layout.stance_legs(k)
        for i in stance:
            idx = layout.force(k, i)
            share = np.array([0.0, 0.0, 1.0 / len(stance)])
            for a in range(3):
                rows.append(row)
                cols.append(idx[a])
                vals.append(1.0)
                target.append(share[a])
                row += 1
    # foot velocity relative to the base
    for k in range(layout.knot_count - 1):
        base_now, base_next = layout.base(k, "r"), layout.base(k + 1, "r")
        for i in range(len(layout.leg_names)):
            now, nxt = layout.foot(k, i), layout.foot(k + 1, i)
            for a in range(3):
                rows += [row] * 4
                cols += [nxt[a], base_next[a], now[a], base_now[a]]
                vals += [1.0 / task.dt, -1.0 / task.dt, -1.0 / task.dt, 1.0 / task.dt]
                target.append(0.0)
                row += 1
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(row, layout.size))
    return matrix, np.array(target)


def transcribe(model: RobotModel, terrain: TerrainModel, schedule: ContactSchedule, task: Task,
               toggles: Optional[ConstraintToggles] = None, regularizer_weight: float = 1e-3) -> NlpProblem:
    toggles = toggles or ConstraintToggles()
    _check_schedule(schedule, model, task)

    times = np.arange(task.knot_count) * task.dt
    stance = schedule.stance_mask(times, model.leg_names)
    layout = VariableLayout(task.knot_count, model.leg_names, stance, model.weight)

    builder = _BlockBuilder()
    _dynamics_blocks(builder, layout, model, task)
    _boundary_blocks(builder, layout, task)
    _leg_blocks(builder, layout, model, terrain, schedule, task, toggles)

    lower = np.full(layout.size, -INF)
    upper = np.full(layout.size, INF)
    for k in range(layout.knot_count):
        attitude = layout.base(k, "theta")[:2]
        lower[attitude] = -ATTITUDE_BOUND
        upper[attitude] = ATTITUDE_BOUND

    matrix, target = _objective_terms(layout, task)
    x0 = initial_guess(model, terrain, schedule, task, layout)
    problem = NlpProblem(
        model=model,
        terrain=terrain,
        schedule=schedule,
        task=task,
        toggles=toggles,
        layout=layout,
        blocks=builder.blocks,
        lower_bounds=lower,
        upper_bounds=upper,
        x0=x0,
        regularizer_weight=regularizer_weight,
        objective_matrix=matrix,
        objective_target=target,
    )
    logger.info(
        "Transcribed %d knots: %d variables, %d constraint rows in %d blocks",
        layout.knot_count, problem.variable_count, problem.row_count, len(problem.blocks),
    )
    return problem
