"""Transcription of planning tasks into sparse nonlinear programs and their solvers"""

from planner.nlp.jacobian_check import JacobianReport, check_jacobians
from planner.nlp.layout import VariableLayout
from planner.nlp.solver import solve
from planner.nlp.transcription import NlpProblem, Task, transcribe

__all__ = [
    "JacobianReport",
    "NlpProblem",
    "Task",
    "VariableLayout",
    "check_jacobians",
    "solve",
    "transcribe",
]
