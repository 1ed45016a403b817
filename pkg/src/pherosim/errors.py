"""Exception taxonomy shared across the simulator."""

from __future__ import annotations


class SimulatorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SimulatorError):
    """Invalid configuration: bad value, unknown key, malformed file, bad layout."""


class NumericError(SimulatorError):
    """A numeric invariant broke (non-finite cell, diverging update)."""


class TemporalOrderError(SimulatorError):
    """An operation was asked to evaluate before its reference time."""


class OutOfBoundsError(SimulatorError):
    """A position or index fell outside the arena or grid."""


class UnknownIdError(SimulatorError):
    """A robot, endpoint, or pheromone id is not part of the current run."""


class ScenarioMismatchError(SimulatorError):
    """A log or artifact from one scenario was fed to the other's reducer."""
