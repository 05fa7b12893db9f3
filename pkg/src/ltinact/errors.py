"""Exception types shared across the package."""

from __future__ import annotations


class LtinactError(Exception):
    """Base class for all errors raised by this package."""


class NonUnitMass(LtinactError):
    """Degree distribution probabilities do not sum to one."""


class NonPositiveProbability(LtinactError):
    """A degree was given a probability <= 0."""


class DegreeBelowOne(LtinactError):
    """A degree below 1 appeared in a distribution."""


class UnknownPreset(LtinactError):
    """Requested preset name is not defined."""


class DistFileError(LtinactError):
    """A distribution file could not be parsed; message carries the line number."""


class DegreeExceedsK(LtinactError):
    """The distribution's maximum degree exceeds the number of input symbols."""


class LengthMismatch(LtinactError):
    """Symbol vector length does not match the graph dimensions."""


class NotActive(LtinactError):
    """Attempted to remove an input symbol that is not active."""


class InconsistentReport(LtinactError):
    """A triangularization report does not match the graph it claims to describe."""


class RankDeficient(LtinactError):
    """The inactive-variable system has rank below the number of unknowns."""

    def __init__(self, rank: int, needed: int):
        super().__init__(f"rank {rank} < {needed} inactive variables")
        self.rank = rank
        self.needed = needed


class ConfigMismatch(LtinactError):
    """Simulation and analysis results were produced for different configurations."""
