"""
Artifact files: trajectory CSV (lossless round trip), plot-data CSVs and JSON reports.
Numbers are written with 17 significant digits and read back with round-trip precision.
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from planner.errors import SchemaError
from planner.model import ContactSchedule, Trajectory
from planner.schema import Penetration, TorqueReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
AXES = ("x", "y", "z")
ANGLES = ("roll", "pitch", "yaw")

PathLike = Union[str, Path]


def trajectory_columns(leg_names: Sequence[str]) -> List[str]:
    columns = ["t"]
    columns += [f"r_{a}" for a in AXES]
    columns += [f"rd_{a}" for a in AXES]
    columns += [f"theta_{a}" for a in ANGLES]
    columns += [f"omega_{a}" for a in AXES]
    for leg in leg_names:
        columns += [f"{leg}_p_{a}" for a in AXES]
        columns += [f"{leg}_f_{a}" for a in AXES]
    return columns


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    blocks = [trajectory.times[:, None], trajectory.r, trajectory.rd, trajectory.theta, trajectory.omega]
    for i in range(len(trajectory.leg_names)):
        blocks += [trajectory.feet[:, i], trajectory.forces[:, i]]
    return pd.DataFrame(np.hstack(blocks), columns=trajectory_columns(trajectory.leg_names))


def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
    path = Path(path)
    trajectory_frame(trajectory).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_trajectory_csv(path: PathLike, schedule: ContactSchedule, leg_names: Sequence[str],
                        dt: float) -> Trajectory:
    """
    Parse a trajectory file written by write_trajectory_csv.

    Rows in SchemaError are file line numbers (the header is line 1).
    """
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"{path}: unreadable CSV: {e}") from e

    expected = trajectory_columns(leg_names)
    for column in expected:
        if column not in df.columns:
            raise SchemaError(f"{path}: missing column", row=1, column=column)

    values = np.empty((len(df), len(expected)))
    for j, column in enumerate(expected):
        numeric = pd.to_numeric(df[column], errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(numeric)
        if bad.any():
            row = int(np.argmax(bad))
            raise SchemaError(
                f"{path}: non-finite or non-numeric value '{df[column].iloc[row]}'", row=row + 2, column=column
            )
        values[:, j] = numeric

    knots = int(round(schedule.final_time / dt)) + 1
    if len(df) != knots:
        raise SchemaError(f"{path}: expected {knots} knot rows, found {len(df)}", row=len(df) + 1)

    legs = len(leg_names)
    per_leg = values[:, 13:].reshape(len(df), legs, 6)
    return Trajectory(
        dt=dt,
        schedule=schedule,
        leg_names=tuple(leg_names),
        r=values[:, 1:4],
        rd=values[:, 4:7],
        theta=values[:, 7:10],
        omega=values[:, 10:13],
        feet=per_leg[:, :, :3].copy(),
        forces=per_leg[:, :, 3:].copy(),
    )


def write_torques_csv(report: TorqueReport, path: PathLike) -> Path:
    path = Path(path)
    df = pd.DataFrame({"t": report.times, **report.series})
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_collisions_csv(collisions: Sequence[Penetration], path: PathLike) -> Path:
    path = Path(path)
    columns = ["time", "leg", "point", "depth", "x", "y", "z"]
    rows = [
        {"time": c.time, "leg": c.leg, "point": c.point, "depth": c.depth,
         "x": c.position[0], "y": c.position[1], "z": c.position[2]}
        for c in collisions
    ]
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_base_csv(trajectory: Trajectory, path: PathLike) -> Path:
    path = Path(path)
    df = pd.DataFrame({"t": trajectory.times, "r_x": trajectory.r[:, 0], "rd_x": trajectory.rd[:, 0]})
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_table(rows: List[Dict], columns: Sequence[str], path: PathLike) -> Path:
    path = Path(path)
    pd.DataFrame(rows, columns=list(columns)).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_json(model: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(model.model_dump_json(indent=2))
    return path
