# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Optional


class FradelayError(Exception):
    pass


class DomainError(FradelayError, ValueError):
    pass


class ConfigError(FradelayError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class RegionError(FradelayError):
    pass


class ContourTooCloseError(FradelayError):
    pass


class NearDefectiveError(FradelayError):
    pass


class QuadratureError(FradelayError):
    pass


class NoConvergenceError(FradelayError):
    def __init__(self, message: str, last_delta: float, iterations: int):
        super().__init__(message)
        self.last_delta = last_delta
        self.iterations = iterations


class InnerIterationError(FradelayError):
    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message)
        self.step_index = step_index


class NoContractionError(FradelayError):
    pass


class TrajectoryOverflowError(FradelayError, OverflowError):
    """Solution left the double range; ``trajectory`` holds the rows computed before."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
