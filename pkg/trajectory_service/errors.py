from __future__ import annotations

from typing import Optional


class TrajectoryError(Exception):
    """Base class for every error raised by the trajectory service."""


class DomainError(TrajectoryError, ValueError):
    """An argument lies outside the domain of a numerical map."""


class KnotSpacingError(DomainError):
    """Two neighbouring knots are rotated by (almost) half a turn relative to each other."""


class SimulationError(TrajectoryError):
    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        if t is not None:
            message = f"{message} (t={t:.6f}s)"
        super().__init__(message)


class ConfigError(TrajectoryError):
    """Experiment configuration could not be read or validated."""


__all__ = ["TrajectoryError", "DomainError", "KnotSpacingError", "SimulationError", "ConfigError"]
