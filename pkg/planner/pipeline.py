"""
End-to-end workflows shared by the command line and the HTTP surface:
plan and validate a scenario, re-validate a stored trajectory, dump polytopes,
and check constraint Jacobians.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from planner import artifacts, plots
from planner.errors import PlannerError, Unreachable
from planner.kinematics import leg_ik
from planner.model import LegModel, Trajectory
from planner.nlp import JacobianReport, NlpProblem, check_jacobians, solve, transcribe
from planner.polytope import HalfspacePolytope, compare_polytopes, exact_force_polytope, morph, polar_coords
from planner.scenario import Scenario, load_scenario_config, prepare
from planner.schema import RunReport, ScenarioConfig, SolveStats, TorqueReport
from planner.validate import collision_sweep, feasibility_audit, foothold_audit, torque_replay

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_VALIDATION = 2

PathLike = Union[str, Path]


def apply_overrides(config: ScenarioConfig, no_polytope: bool = False, no_shin: bool = False,
                    no_foot_radius: bool = False) -> ScenarioConfig:
    toggles = config.constraints.model_copy(update={
        "polytope": config.constraints.polytope and not no_polytope,
        "shin": config.constraints.shin and not no_shin,
        "foot_radius": config.constraints.foot_radius and not no_foot_radius,
    })
    return config.model_copy(update={"constraints": toggles})


def build_problem(scenario: Scenario) -> NlpProblem:
    return transcribe(
        scenario.model,
        scenario.terrain,
        scenario.schedule,
        scenario.task,
        scenario.config.constraints,
        scenario.config.solver.regularizer_weight,
    )


def validate_trajectory(scenario: Scenario, problem: NlpProblem, trajectory: Trajectory,
                        stats: Optional[SolveStats] = None) -> RunReport:
    """Run every oracle and derive the exit code"""
    config = scenario.config
    failures: List[str] = []

    audit = feasibility_audit(problem, trajectory)
    if not audit.passed(config.solver.feasibility_tol):
        detail = audit.worst_block or f"swing forces at {audit.swing_force_knots[:3]}"
        failures.append(f"feasibility: {detail} (violation {audit.max_violation:.2e})")

    try:
        torques = torque_replay(trajectory, scenario.model, config.validation.minor_violation)
        over = [f"{j.leg} {j.joint} {j.max_abs:.1f}/{j.limit:.0f} N m" for j in torques.joints if not j.minor_only]
        if over:
            failures.append("torque_limits: " + ", ".join(over))
    except Unreachable as e:
        torques = TorqueReport(joints=[])
        failures.append(f"torque_replay: {e}")

    collisions = collision_sweep(trajectory, scenario.terrain, scenario.model,
                                 config.validation.substeps, config.constraints.n_probe)
    if collisions:
        deepest = max(collisions, key=lambda c: c.depth)
        failures.append(
            f"collisions: {len(collisions)} penetration(s), deepest {deepest.leg} {deepest.point} "
            f"{deepest.depth * 100:.1f} cm at t={deepest.time:.2f} s"
        )

    footholds = foothold_audit(trajectory, scenario.terrain, scenario.model)
    if footholds:
        failures.append(f"foot_radius: {len(footholds)} stance foothold(s) straddle a terrain edge")

    if stats is not None and not stats.converged:
        exit_code = EXIT_NOT_CONVERGED
    elif failures:
        exit_code = EXIT_VALIDATION
    else:
        exit_code = EXIT_OK

    return RunReport(
        scenario=config.name,
        solve=stats,
        audit=audit,
        torques=torques,
        collisions=collisions,
        footholds=footholds,
        exit_code=exit_code,
        failures=failures,
    )


def write_run_artifacts(scenario: Scenario, trajectory: Trajectory, report: RunReport, out_dir: PathLike) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_trajectory_csv(trajectory, out / "trajectory.csv")
    artifacts.write_json(report, out / "report.json")
    artifacts.write_torques_csv(report.torques, out / "torques.csv")
    artifacts.write_collisions_csv(report.collisions, out / "collisions.csv")
    artifacts.write_base_csv(trajectory, out / "base_x.csv")
    if scenario.config.output.plots:
        if report.torques.joints:
            plots.write_figure(plots.create_torque_figure(report.torques), out / "torques.html")
        plots.write_figure(plots.create_base_figure(trajectory), out / "base_x.html")
    return out


def plan(config: ScenarioConfig, base_dir: PathLike = ".") -> Tuple[Scenario, Trajectory, RunReport]:
    scenario = prepare(config, base_dir)
    problem = build_problem(scenario)
    trajectory, stats = solve(problem, config.solver)
    report = validate_trajectory(scenario, problem, trajectory, stats)
    return scenario, trajectory, report


def run_scenario(path: PathLike, out_dir: PathLike, no_polytope: bool = False, no_shin: bool = False,
                 no_foot_radius: bool = False) -> RunReport:
    path = Path(path)
    config = apply_overrides(load_scenario_config(path), no_polytope, no_shin, no_foot_radius)
    scenario, trajectory, report = plan(config, path.parent)
    target = write_run_artifacts(scenario, trajectory, report, Path(out_dir) / config.name)
    logger.info("Artifacts written to %s", target)
    return report


def check_trajectory(csv_path: PathLike, scenario_path: PathLike, out_dir: PathLike) -> RunReport:
    """Validate a stored trajectory against its scenario without solving"""
    scenario_path = Path(scenario_path)
    scenario = prepare(load_scenario_config(scenario_path), scenario_path.parent)
    trajectory = artifacts.read_trajectory_csv(csv_path, scenario.schedule, scenario.model.leg_names,
                                               scenario.task.dt)
    problem = build_problem(scenario)
    report = validate_trajectory(scenario, problem, trajectory)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_json(report, out / "report.json")
    return report


# ============================================================================
# Polytope dump
# ============================================================================

def sample_polytopes(leg: LegModel, length: float, alpha: float) -> Tuple[HalfspacePolytope, HalfspacePolytope]:
    """(morphed, exact) polytope for the foot at distance l and tilt alpha from the hip"""
    p_base = np.asarray(leg.hip, dtype=float) + np.array([length * math.sin(alpha), 0.0, -length * math.cos(alpha)])
    morphed = morph(polar_coords(p_base, leg.hip), leg.polytopes)
    chain = leg.sagittal_leg()
    exact = exact_force_polytope(leg_ik(p_base, chain), chain, leg.torque_limits[1:])
    return morphed, exact


POLYTOPE_COLUMNS = ("sample", "l", "alpha", "kind", "row", "n_x", "n_z", "d")
ERROR_COLUMNS = ("sample", "l", "alpha", "angle_dev_deg", "offset_rel_dev")


def polytope_dump(scenario_path: PathLike, leg_name: str, l_samples: int, alpha_samples: int,
                  alpha_max: float, out_dir: PathLike) -> Tuple[Path, Path]:
    scenario_path = Path(scenario_path)
    scenario = prepare(load_scenario_config(scenario_path), scenario_path.parent)
    leg = scenario.model.leg(leg_name)
    distances = leg.polytopes.distances
    lengths = np.linspace(distances[0], distances[-1], l_samples)
    alphas = np.linspace(-alpha_max, alpha_max, alpha_samples) if alpha_samples > 1 else np.zeros(alpha_samples)

    polytope_rows: List[Dict] = []
    error_rows: List[Dict] = []
    sample = 0
    for length in lengths:
        for alpha in alphas:
            morphed, exact = sample_polytopes(leg, float(length), float(alpha))
            for kind, poly in (("morphed", morphed), ("exact", exact)):
                for j in range(poly.count):
                    polytope_rows.append({
                        "sample": sample, "l": length, "alpha": alpha, "kind": kind, "row": j,
                        "n_x": poly.normals[j, 0], "n_z": poly.normals[j, 1], "d": poly.offsets[j],
                    })
            angle_dev, offset_dev = compare_polytopes(morphed, exact)
            error_rows.append({"sample": sample, "l": length, "alpha": alpha,
                               "angle_dev_deg": angle_dev, "offset_rel_dev": offset_dev})
            sample += 1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("Dumped %d polytope pairs for leg %s", sample, leg_name)
    return (
        artifacts.write_table(polytope_rows, POLYTOPE_COLUMNS, out / "polytopes.csv"),
        artifacts.write_table(error_rows, ERROR_COLUMNS, out / "polytope_errors.csv"),
    )


# ============================================================================
# Jacobian check
# ============================================================================

def jacobian_check(scenario_path: PathLike, out_dir: PathLike, seed: int = 0, step: float = 1e-6,
                   perturbation: float = 1e-2) -> JacobianReport:
    """Check all analytic Jacobians at a randomly perturbed initial guess"""
    scenario_path = Path(scenario_path)
    scenario = prepare(load_scenario_config(scenario_path), scenario_path.parent)
    problem = build_problem(scenario)
    rng = np.random.default_rng(seed)
    x = problem.x0 + perturbation * rng.standard_normal(problem.variable_count)
    report = check_jacobians(problem, x, step)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_json(report, out / "jacobian_check.json")
    return report


def describe_error(error: PlannerError) -> str:
    return f"{type(error).__name__}: {error}"
