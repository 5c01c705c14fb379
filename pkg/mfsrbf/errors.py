"""Exception hierarchy shared by every mfsrbf module."""


class MfsrbfError(Exception):
    pass


class InvalidArgumentError(MfsrbfError, ValueError):
    pass


class InvalidStateError(MfsrbfError, RuntimeError):
    pass


class DuplicatePointError(InvalidArgumentError):
    pass


class UnsupportedDimensionError(InvalidArgumentError):
    pass


class OptimizationError(MfsrbfError):
    pass


class EvaluationError(MfsrbfError):
    """An objective failed to return a value at some fidelity level."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class ConfigError(MfsrbfError, ValueError):
    """Invalid configuration; `key` is the dotted name of the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
