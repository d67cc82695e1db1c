"""
Compare every analytic constraint Jacobian against central differences.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from planner.nlp.transcription import NlpProblem, central_difference

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-5


class BlockCheck(BaseModel):
    name: str
    analytic: bool
    blocks: int = 0
    kinks: int = Field(0, description="Blocks near a polytope interpolation kink, excluded from the gate")
    max_rel_error: float = 0.0


class JacobianReport(BaseModel):
    tolerance: float
    blocks: List[BlockCheck]

    @property
    def passed(self) -> bool:
        return all(check.max_rel_error < self.tolerance for check in self.blocks if check.analytic)

    def block(self, name: str) -> Optional[BlockCheck]:
        return next((check for check in self.blocks if check.name == name), None)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric))) / scale


def check_jacobians(problem: NlpProblem, x: np.ndarray, step: float = 1e-6,
                    tolerance: float = DEFAULT_TOLERANCE) -> JacobianReport:
    """Max relative error per block name; finite-difference blocks are listed but not compared"""
    checks: Dict[str, BlockCheck] = {}
    for block in problem.blocks:
        check = checks.setdefault(block.name, BlockCheck(name=block.name, analytic=block.jacobian is not None))
        check.blocks += 1
        if block.jacobian is None:
            continue
        z = problem.local(block, x)
        if block.near_kink is not None and block.near_kink(z):
            check.kinks += 1
            continue
        numeric = central_difference(block.residual, z, step)
        error = relative_error(np.atleast_2d(block.jacobian(z)), numeric)
        if error > check.max_rel_error:
            check.max_rel_error = error
            if error >= tolerance:
                logger.warning("Jacobian mismatch in %s: relative error %.2e", block.label, error)

    report = JacobianReport(tolerance=tolerance, blocks=list(checks.values()))
    logger.info("Jacobian check %s over %d blocks", "passed" if report.passed else "failed", len(problem.blocks))
    return report
