"""Exception hierarchy shared across the package."""


class MrtError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MrtError):
    """A configuration value violates an invariant (bad field named in the message)."""


class DimensionError(MrtError):
    """Tensor shapes do not line up for the requested operation."""


class SchemaError(MrtError):
    """Data does not conform to the declared variable schema."""


class StatisticsError(MrtError):
    """Normalization statistics cannot be computed (e.g. batch of one)."""


class QuantisationCollapseError(MrtError):
    """Two aggregation boundaries rounded onto the same grid point."""


class SplitInfeasibleError(MrtError):
    """Too few distinct split keys to form train/val/test."""


class ResolutionTooDenseError(MrtError):
    """A resolution asks for more patches than there are time steps."""
