"""Exception hierarchy shared by every corrtax module."""


class CorrtaxError(ValueError):
    """Base class for data and validation errors raised by corrtax."""


class PanelError(CorrtaxError):
    """Malformed or invalid panel input (parsing, validation, windowing)."""


class CorrelationError(CorrtaxError):
    """Correlation matrix cannot be formed (zero variance, too few rows)."""


class TreeError(CorrtaxError):
    """Spanning tree or dendrogram construction failed."""


class DynamicsError(CorrtaxError):
    """Rolling-window or half-life computation failed."""


class ConfigError(CorrtaxError):
    """Invalid synthetic-generator configuration."""
