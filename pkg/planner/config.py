"""
Process-level settings for the planner.
Reads log verbosity, artifact directory and batch parallelism from the environment (.env supported).
"""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


class PlannerSettings:
    """Environment-backed settings"""

    def __init__(self):
        self.log_level = os.getenv("PLANNER_LOG_LEVEL", "INFO").upper()
        self.out_dir = Path(os.getenv("PLANNER_OUT_DIR", "out"))

        jobs = os.getenv("PLANNER_JOBS", "1")
        try:
            self.jobs = int(jobs)
        except ValueError:
            raise ValueError(f"PLANNER_JOBS must be an integer, got '{jobs}'")

        # Validate
        if self.jobs < 1:
            raise ValueError("PLANNER_JOBS must be at least 1")
        if logging.getLevelName(self.log_level) == f"Level {self.log_level}":
            raise ValueError(
                f"Unknown PLANNER_LOG_LEVEL '{self.log_level}'. "
                "Use one of DEBUG, INFO, WARNING, ERROR."
            )


# Global instance
_settings: Optional[PlannerSettings] = None


def get_settings() -> PlannerSettings:
    """Get or create the settings singleton"""
    global _settings
    if _settings is None:
        _settings = PlannerSettings()
    return _settings


def reset_settings() -> None:
    """Forget cached settings (environment changed)"""
    global _settings
    _settings = None


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once from settings"""
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
