"""Exception hierarchy shared across the package."""


class PviMineError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PviMineError):
    """Malformed input data (bad column, non-monotonic time, duplicate sample)."""


class GeometryError(PviMineError):
    """Degenerate or inconsistent geometry (zero-area polygon, empty window)."""


class FitError(PviMineError):
    """Least-squares fit cannot be performed (too few samples, rank deficiency)."""


class ConfigError(PviMineError):
    """Invalid scene / run / scenario configuration."""
