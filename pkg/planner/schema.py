"""
Pydantic models for scenario and robot files and for run reports.
Scenario and robot files are YAML documents carrying `schema_version: 1`.
"""

from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1

Vector3 = Tuple[float, float, float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================================================
# Robot
# ============================================================================

class LinkLengths(StrictModel):
    upper: float = Field(0.35, gt=0, description="Thigh length (m)")
    lower: float = Field(0.35, gt=0, description="Shank length (m)")


class LegMasses(StrictModel):
    knee_fraction: float = Field(0.02, ge=0, description="Point mass at the knee, fraction of trunk mass")
    foot_fraction: float = Field(0.005, ge=0, description="Point mass at the foot, fraction of trunk mass")


class LegConfig(StrictModel):
    name: str = Field(..., description="Leg label, e.g. LF, RH")
    hip: Vector3 = Field(..., description="Hip position in the base frame (m)")
    nominal_foot: Vector3 = Field(..., description="Centre of the kinematic box in the base frame (m)")
    shin_angle_deg: float = Field(..., description="Shin inclination beta above the horizontal (deg)")
    knee_forward: bool = Field(..., description="Knee points along +x (hind legs of a HyQ-like robot)")
    torque_limits: Optional[Vector3] = Field(None, description="Per-leg override of HAA, HFE, KFE limits (N m)")


def _hyq_legs() -> List[LegConfig]:
    legs = []
    for name, x, y in (("LF", 0.37, 0.21), ("RF", 0.37, -0.21), ("LH", -0.37, 0.21), ("RH", -0.37, -0.21)):
        hind = name.endswith("H")
        legs.append(LegConfig(
            name=name,
            hip=(x, y, 0.0),
            nominal_foot=(x, y, -0.5),
            shin_angle_deg=37.0 if hind else 127.0,
            knee_forward=hind,
        ))
    return legs


class RobotConfig(StrictModel):
    """Defaults describe a HyQ-like quadruped; mass and inertia are not measured values"""

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = "hyq"
    mass: float = Field(90.0, gt=0, description="Trunk mass (kg)")
    inertia: List[List[float]] = Field(
        default_factory=lambda: [[4.0, 0.0, 0.0], [0.0, 8.5, 0.0], [0.0, 0.0, 10.0]],
        description="Body-frame inertia tensor (kg m^2)",
    )
    box_half_edge: float = Field(0.14, gt=0, description="Kinematic box half edge b (m)")
    shin_length: float = Field(0.3, gt=0, description="Shin segment length s (m)")
    foot_radius: float = Field(0.02, ge=0, description="Foot radius r (m)")
    links: LinkLengths = Field(default_factory=LinkLengths)
    torque_limits: Vector3 = Field((120.0, 150.0, 150.0), description="HAA, HFE, KFE limits (N m)")
    polytope_distances: List[float] = Field(
        default_factory=lambda: [0.38, 0.50, 0.66],
        description="Hip-to-foot distances of the predefined polytopes (m), increasing",
    )
    leg_masses: LegMasses = Field(default_factory=LegMasses)
    legs: List[LegConfig] = Field(default_factory=_hyq_legs)

    @model_validator(mode="after")
    def check_shapes(self):
        if len(self.inertia) != 3 or any(len(row) != 3 for row in self.inertia):
            raise ValueError("inertia must be 3x3")
        if len(self.polytope_distances) < 3:
            raise ValueError("at least three polytope distances are required")
        if any(b <= a for a, b in zip(self.polytope_distances, self.polytope_distances[1:])):
            raise ValueError("polytope distances must be strictly increasing")
        if not self.legs:
            raise ValueError("robot needs at least one leg")
        return self


# ============================================================================
# Scenario
# ============================================================================

class TerrainConfig(StrictModel):
    kind: Literal["flat", "pallet", "samples"] = "flat"
    height: float = Field(0.0, description="Pallet height (m)")
    edge_x: float = Field(0.5, description="x of the pallet's near edge (m)")
    length: Optional[float] = Field(None, gt=0, description="Pallet length along x; unbounded when omitted")
    ramp: float = Field(0.01, gt=0, description="Width of the smoothing ramp used by the solver (m)")
    xs: Optional[List[float]] = None
    ys: Optional[List[float]] = None
    heights: Optional[List[List[float]]] = Field(None, description="heights[i][j] at (xs[i], ys[j])")
    friction: float = Field(0.5, gt=0, description="Friction coefficient mu")
    min_clearance: float = Field(0.03, ge=0, description="Swing clearance h_min (m)")
    force_cap: Optional[float] = Field(None, gt=0, description="Normal force cap f_max (N); 2 m g when omitted")

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == "pallet" and self.height < 0:
            raise ValueError("pallet height must be non-negative")
        if self.kind == "samples" and (self.xs is None or self.ys is None or self.heights is None):
            raise ValueError("samples terrain needs xs, ys and heights")
        return self


class TaskConfig(StrictModel):
    start: Vector3 = Field((0.0, 0.0, 0.5), description="Initial CoM position (m)")
    goal: Vector3 = Field((1.0, 0.0, 0.5), description="Final CoM position (m)")
    start_yaw: float = 0.0
    goal_yaw: float = 0.0
    final_time: float = Field(2.4, gt=0, description="Horizon T_f (s)")
    dt: float = Field(0.1, gt=0, description="Knot spacing (s)")
    gait: Literal["stand", "crawl", "hop"] = "crawl"
    cycles: int = Field(3, ge=1)
    flight_fraction: float = Field(0.5, gt=0, lt=1, description="Hop only: share of each cycle in flight")


class ConstraintToggles(StrictModel):
    polytope: bool = True
    shin: bool = True
    foot_radius: bool = True
    n_probe: int = Field(2, ge=0, description="Intermediate shin probe points")


class SolverOptions(StrictModel):
    method: Literal["interior-point", "augmented-lagrangian"] = "interior-point"
    max_iterations: int = Field(500, ge=1)
    feasibility_tol: float = Field(1e-4, gt=0)
    stationarity_tol: float = Field(1e-3, gt=0)
    regularizer_weight: float = Field(1e-3, ge=0)


class ValidationOptions(StrictModel):
    substeps: int = Field(1, ge=1, description="Collision sweep samples per knot interval")
    minor_violation: float = Field(0.05, ge=0, description="Torque overshoot tolerated as minor, fraction of limit")


class OutputConfig(StrictModel):
    plots: bool = Field(False, description="Also write plotly HTML charts")


class ScenarioConfig(StrictModel):
    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = "scenario"
    robot: Union[str, RobotConfig] = Field(
        default_factory=RobotConfig,
        description="Robot file path (relative to the scenario file) or inline robot",
    )
    terrain: TerrainConfig = Field(default_factory=TerrainConfig)
    task: TaskConfig = Field(default_factory=TaskConfig)
    constraints: ConstraintToggles = Field(default_factory=ConstraintToggles)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    validation: ValidationOptions = Field(default_factory=ValidationOptions)
    output: OutputConfig = Field(default_factory=OutputConfig)


# ============================================================================
# Reports
# ============================================================================

class SolveStats(BaseModel):
    method: str
    status: Literal["converged", "max_iterations", "line_search_failure", "step_too_small", "not_converged"]
    iterations: int
    max_violation: float = Field(..., description="Largest scaled constraint violation")
    objective: float
    optimality: float = Field(..., description="Scaled first-order stationarity measure")
    wall_time: float = Field(..., description="Seconds")
    converged: bool
    worst_block: Optional[str] = None


class JointTorque(BaseModel):
    leg: str
    joint: Literal["HAA", "HFE", "KFE"]
    max_abs: float = Field(..., description="Largest |tau| over the trajectory (N m)")
    limit: float
    violation_fraction: float = Field(..., ge=0, le=1, description="Share of knots above the limit")
    minor_only: bool = Field(..., description="Never above the limit by more than the minor threshold")


class TorqueReport(BaseModel):
    joints: List[JointTorque]
    times: List[float] = Field(default_factory=list, exclude=True)
    series: Dict[str, List[float]] = Field(default_factory=dict, exclude=True)

    @property
    def exceeded(self) -> bool:
        return any(j.violation_fraction > 0 for j in self.joints)

    @property
    def passed(self) -> bool:
        return all(j.minor_only for j in self.joints)


class Penetration(BaseModel):
    time: float
    leg: str
    point: str = Field(..., description="foot, knee or probeN")
    depth: float = Field(..., description="Terrain height minus point height (m)")
    position: Vector3


class FootholdIssue(BaseModel):
    knot: int
    leg: str
    height_gaps: Tuple[float, float] = Field(..., description="Height difference ahead of and behind the foot (m)")


class AuditReport(BaseModel):
    max_violation: float
    worst_block: Optional[str] = None
    block_maxima: Dict[str, float] = Field(default_factory=dict)
    swing_force_knots: List[Tuple[int, str]] = Field(default_factory=list)

    def passed(self, tol: float) -> bool:
        return self.max_violation <= tol and not self.swing_force_knots


class RunReport(BaseModel):
    scenario: str
    solve: Optional[SolveStats] = None
    audit: AuditReport
    torques: TorqueReport
    collisions: List[Penetration]
    footholds: List[FootholdIssue]
    exit_code: int
    failures: List[str] = Field(default_factory=list, description="Names of failing checks")
