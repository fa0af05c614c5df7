"""Exception hierarchy shared by all modules."""


class GpConsensusError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEdge(GpConsensusError):
    """Edge list contains a self-loop, duplicate, or out-of-range index."""


class DisconnectedGraph(GpConsensusError):
    """Communication graph is not connected."""


class InvalidParam(GpConsensusError):
    """Numeric parameter outside its admissible range."""


class NumericalBreakdown(GpConsensusError):
    """Linear algebra failed beyond the allowed jitter/clamp budget."""


class CapacityExceeded(GpConsensusError):
    """Training set is full (max_points reached)."""


class OutOfDomain(GpConsensusError):
    """Query point lies outside the compact domain."""


class SingularGain(GpConsensusError):
    """Input gain g(x) fell below the singularity guard."""


class ConfigError(GpConsensusError):
    """Scenario configuration is malformed or inconsistent."""
