"""Exception types raised by the simulator."""

from __future__ import annotations

import numpy as np


class ConfigurationError(ValueError):
    """Invalid layout, link budget, coloring or simulation configuration."""


class DomainError(ValueError):
    """A physical quantity is outside its admissible range."""


class ScheduleError(ValueError):
    """The user-to-group schedule is ragged or inconsistent."""


class NumericalRankError(np.linalg.LinAlgError):
    """A linear system that must be solved is numerically singular."""


class SolverError(RuntimeError):
    """A numerical solver failed; ``stage`` names where, ``diagnostics`` says why."""

    def __init__(self, message: str, stage: str = "", diagnostics: dict | None = None):
        super().__init__(f"[{stage}] {message}" if stage else message)
        self.stage = stage
        self.diagnostics = dict(diagnostics or {})
