"""
FastAPI service for the planner
Plans scenarios and serves force polytopes for plotting
"""

from functools import lru_cache
from pathlib import Path
from typing import List

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from planner import __version__, pipeline
from planner.errors import PlannerError
from planner.model import RobotModel
from planner.polytope import HalfspacePolytope, compare_polytopes
from planner.scenario import default_robot
from planner.schema import RunReport, ScenarioConfig

# Robot paths in request bodies are resolved against the project root
PROJECT_ROOT = Path(__file__).resolve().parent.parent

app = FastAPI(
    title="SRBD Planner API",
    description="Trajectory planning for legged robots with force polytopes and leg-terrain clearance",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# ============================================================================
# Response schemas
# ============================================================================

class PolytopeRows(BaseModel):
    normals: List[List[float]]
    offsets: List[float]


class PolytopeResponse(BaseModel):
    leg: str
    l: float
    alpha: float
    morphed: PolytopeRows
    exact: PolytopeRows
    angle_dev_deg: float
    offset_rel_dev: float


def _rows(poly: HalfspacePolytope) -> PolytopeRows:
    return PolytopeRows(normals=poly.normals.tolist(), offsets=poly.offsets.tolist())


@lru_cache(maxsize=1)
def get_robot() -> RobotModel:
    return default_robot()


# ============================================================================
# API Endpoints
# ============================================================================

@app.get("/")
def root():
    """Health check endpoint"""
    return {
        "status": "ok",
        "service": "SRBD Planner API",
        "version": __version__,
    }


@app.post("/api/plan", response_model=RunReport)
def plan_scenario(config: ScenarioConfig):
    """
    Transcribe, solve and validate a scenario

    The report's exit_code follows the command line: 0 pass, 1 not converged, 2 validator failure.
    """
    try:
        _, _, report = pipeline.plan(config, PROJECT_ROOT)
    except PlannerError as e:
        raise HTTPException(status_code=422, detail=pipeline.describe_error(e))
    return report


@app.get("/api/polytopes/{leg}", response_model=PolytopeResponse)
def get_polytopes(
    leg: str,
    l: float = Query(..., gt=0, description="Hip-to-foot distance (m)"),
    alpha: float = Query(0.0, description="Leg tilt from vertical (rad)"),
):
    """Morphed and exact force polytope of the default robot's leg"""
    robot = get_robot()
    if leg not in robot.leg_names:
        raise HTTPException(status_code=404, detail=f"Unknown leg '{leg}', expected one of {list(robot.leg_names)}")
    try:
        morphed, exact = pipeline.sample_polytopes(robot.leg(leg), l, alpha)
    except PlannerError as e:
        raise HTTPException(status_code=422, detail=pipeline.describe_error(e))

    angle_dev, offset_dev = compare_polytopes(morphed, exact)
    return PolytopeResponse(
        leg=leg, l=l, alpha=alpha,
        morphed=_rows(morphed), exact=_rows(exact),
        angle_dev_deg=angle_dev, offset_rel_dev=offset_dev,
    )
