# coding=utf-8

import typing as t


class SarError(Exception):
    """
    Base error of the training system
    """

    # Process exit code used by the command line
    exit_code: int = 1


class ShapeError(SarError, ValueError):
    """
    Incompatible tensor or feature map shapes
    """


class NumericError(SarError, ArithmeticError):
    """
    Non-finite values or values outside an operation's domain
    """


class TapeError(SarError, RuntimeError):
    """
    Invalid use of the gradient tape
    """


class EnvError(SarError, RuntimeError):
    """
    Invalid environment usage (e.g. stepping a finished episode)
    """


class PoolError(SarError, ValueError):
    """
    Unknown style pool or style id outside its pool
    """

    exit_code = 2


class ConfigError(SarError, ValueError):
    """
    Run configuration failed validation
    """

    exit_code = 2

    def __init__(self, message: str, fields: t.Optional[t.Dict[str, str]] = None) -> None:
        """
        Initialize configuration error

        Args:
            message (str): Summary message
            fields (t.Optional[t.Dict[str, str]]): Mapping of field name to reason
        """

        self.fields = dict(fields or {})

        if self.fields:
            # Field-level details
            message += "\n" + "\n".join(f"  {name}: {reason}" for name, reason in self.fields.items())

        super(ConfigError, self).__init__(message)


class MissingArtifactError(SarError, FileNotFoundError):
    """
    Required run artifact (checkpoint, eval.json, metrics.csv) is missing
    """

    exit_code = 3


class MetricError(SarError, KeyError):
    """
    Unknown metric column
    """

    exit_code = 4

    def __str__(self) -> str:
        # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


__all__ = (
    "SarError",
    "ShapeError",
    "NumericError",
    "TapeError",
    "EnvError",
    "PoolError",
    "ConfigError",
    "MissingArtifactError",
    "MetricError"
)
