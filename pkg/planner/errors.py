"""
Exception types raised by the planner.
Everything derives from PlannerError so callers can catch one type.
"""


class PlannerError(Exception):
    """Base class for planner failures"""


class ConfigError(PlannerError):
    """Scenario or robot file is invalid"""


class GimbalLock(PlannerError):
    """Pitch too close to +-pi/2 for the ZYX Euler chart"""


class SingularConfiguration(PlannerError):
    """Leg Jacobian is (numerically) singular"""


class DegenerateFoot(PlannerError):
    """Foot coincides with the hip, polar coordinates undefined"""


class Unreachable(PlannerError):
    """Foot position outside the leg's reachable annulus"""


class InfeasibleSchedule(PlannerError):
    """Contact schedule cannot be transcribed on the knot grid"""


class SchemaError(PlannerError):
    """Malformed trajectory file"""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class KinkWarning(UserWarning):
    """Polytope Jacobian evaluated on the interpolation kink; one-sided value returned"""
