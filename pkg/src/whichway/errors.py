"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid physical parameters or grid settings."""


class UndefinedConditionalError(ValueError):
    """Conditioning on a detection position with zero probability."""


class PostSelectionSingularError(ValueError):
    """Weak value requested at a post-selected outcome with zero overlap."""


class InsufficientCoverageError(ValueError):
    """Momentum grid leaves too much detection probability outside its range."""


class IncompatibleBinningError(ValueError):
    """Count tables with different binning or rotation angle cannot be merged."""


class StatisticalInsufficiencyError(ValueError):
    """Too few events for the requested estimate or test."""


class EmptyBinError(StatisticalInsufficiencyError):
    """A proportion was requested for a bin with no events."""
