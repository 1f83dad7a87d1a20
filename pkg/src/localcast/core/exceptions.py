class LocalcastError(Exception):
    """Base class for simulator errors."""


class ScenarioError(LocalcastError, ValueError):
    """Scenario failed validation or a query named an unknown node."""


class ChannelError(LocalcastError, ValueError):
    """Received power is undefined (a transmitter sits on the receiver)."""


class AutomatonError(LocalcastError, RuntimeError):
    """A node automaton was stepped after it halted."""


class LowerBoundError(LocalcastError, ValueError):
    """Infeasible lower-bound construction or out-of-partition probability."""


class AnalysisError(LocalcastError, ValueError):
    """Not enough data, or a degenerate design matrix, for a fit."""
