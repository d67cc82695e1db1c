"""
Scenario ingestion: YAML files to validated configs to ready-to-plan objects
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from planner.errors import ConfigError
from planner.kinematics import PlanarLeg
from planner.model import ContactSchedule, LegModel, RobotModel
from planner.nlp.transcription import Task
from planner.polytope import PredefinedPolytopes
from planner.schema import RobotConfig, ScenarioConfig, TaskConfig, TerrainConfig
from planner.terrain import FlatGround, HeightSamples, Pallet, TerrainModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class Scenario:
    config: ScenarioConfig
    robot_config: RobotConfig
    model: RobotModel
    terrain: TerrainModel
    schedule: ContactSchedule
    task: Task


def load_yaml(path: PathLike) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return data


def load_robot_config(path: PathLike) -> RobotConfig:
    try:
        return RobotConfig.model_validate(load_yaml(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_scenario_config(path: PathLike) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(load_yaml(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def resolve_robot(config: ScenarioConfig, base_dir: PathLike) -> RobotConfig:
    if isinstance(config.robot, RobotConfig):
        return config.robot
    return load_robot_config(Path(base_dir) / config.robot)


# ============================================================================
# Builders
# ============================================================================

@lru_cache(maxsize=32)
def _predefined(upper: float, lower: float, knee_forward: bool, torque_limits: Tuple[float, float],
                distances: Tuple[float, ...]) -> PredefinedPolytopes:
    chain = PlanarLeg(upper=upper, lower=lower, hip=np.zeros(3),
                      joint_limits=((-math.pi, math.pi),) * 2, dofs=2, knee_forward=knee_forward)
    return PredefinedPolytopes.from_leg(chain, torque_limits, distances)


def build_robot(config: RobotConfig) -> RobotModel:
    legs = []
    for leg in config.legs:
        limits = tuple(leg.torque_limits or config.torque_limits)
        legs.append(LegModel(
            name=leg.name,
            hip=np.array(leg.hip, dtype=float),
            nominal_foot=np.array(leg.nominal_foot, dtype=float),
            torque_limits=np.array(limits, dtype=float),
            upper_link=config.links.upper,
            lower_link=config.links.lower,
            shin_angle=math.radians(leg.shin_angle_deg),
            knee_forward=leg.knee_forward,
            polytopes=_predefined(config.links.upper, config.links.lower, leg.knee_forward,
                                  (limits[1], limits[2]), tuple(config.polytope_distances)),
            knee_mass=config.leg_masses.knee_fraction * config.mass,
            foot_mass=config.leg_masses.foot_fraction * config.mass,
        ))
    return RobotModel(
        mass=config.mass,
        inertia=np.array(config.inertia, dtype=float),
        legs=tuple(legs),
        box_half_edge=config.box_half_edge,
        shin_length=config.shin_length,
        foot_radius=config.foot_radius,
    )


def build_terrain(config: TerrainConfig, model: RobotModel) -> TerrainModel:
    if config.kind == "pallet":
        surface = Pallet(height_m=config.height, edge_x=config.edge_x, length=config.length, ramp=config.ramp)
    elif config.kind == "samples":
        surface = HeightSamples(config.xs, config.ys, config.heights)
    else:
        surface = FlatGround()
    return TerrainModel(
        surface=surface,
        friction=config.friction,
        min_clearance=config.min_clearance,
        force_cap=config.force_cap if config.force_cap is not None else 2.0 * model.weight,
    )


def build_task(config: TaskConfig) -> Task:
    return Task(
        start=np.array(config.start, dtype=float),
        goal=np.array(config.goal, dtype=float),
        final_time=config.final_time,
        dt=config.dt,
        start_theta=np.array([0.0, 0.0, config.start_yaw]),
        goal_theta=np.array([0.0, 0.0, config.goal_yaw]),
    )


def build_schedule(config: TaskConfig, legs: Sequence[str]) -> ContactSchedule:
    if config.gait == "stand":
        return ContactSchedule.stand(legs, config.final_time)
    if config.gait == "hop":
        return ContactSchedule.hop(legs, config.final_time, config.cycles, config.dt, config.flight_fraction)
    return ContactSchedule.crawl(legs, config.final_time, config.cycles, config.dt)


def prepare(config: ScenarioConfig, base_dir: PathLike = ".") -> Scenario:
    robot_config = resolve_robot(config, base_dir)
    model = build_robot(robot_config)
    terrain = build_terrain(config.terrain, model)
    schedule = build_schedule(config.task, model.leg_names)
    logger.info("Scenario '%s': robot %s, %s terrain, %s gait over %.2f s",
                config.name, robot_config.name, config.terrain.kind, config.task.gait, config.task.final_time)
    return Scenario(config, robot_config, model, terrain, schedule, build_task(config.task))


def load_scenario(path: PathLike) -> Scenario:
    path = Path(path)
    return prepare(load_scenario_config(path), path.parent)


def default_robot() -> RobotModel:
    """HyQ-like quadruped with the schema defaults"""
    return build_robot(RobotConfig())
