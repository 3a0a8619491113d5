"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulationError):
    """Scenario configuration violates an invariant or cannot be parsed."""


class ProfileError(SimulationError):
    """Radio-technology profile is malformed or violates its invariants."""


class CalibrationError(SimulationError):
    """Base-station distance calibration could not reach the target SINR.

    Carries the bracket that was searched and the mean SINR achieved at
    its endpoints so the failure is diagnosable.
    """

    def __init__(self, message, bracket=None, achieved=None):
        super().__init__(message)
        self.bracket = bracket
        self.achieved = achieved


class StepSizeError(SimulationError):
    """Mobility step dt is too large (more than one intersection per step)."""


class PlacementError(SimulationError):
    """A node cannot be placed at the requested location."""


class CampaignError(SimulationError):
    """A replication inside a campaign failed; carries the failing index."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class MetricsError(SimulationError):
    """A metric is undefined for the given logs (e.g. zero total energy)."""
