# coding=utf-8

import math
import typing as t
from abc import ABCMeta

from ..core import Field


N = t.TypeVar("N", int, float)


class _Numeric(Field[N], metaclass=ABCMeta):
    """
    Base numeric field type
    """

    _MIN: t.Optional[N] = None
    _MAX: t.Optional[N] = None
    _TYPES = {int, float}

    def validate(self, value: N) -> None:
        """
        Check if value is valid for numeric field type

        Args:
            value (N): Value you want to validate

        Raises:
            ValueError: If value is missing, not finite or out of range
            TypeError: If invalid value type provided
        """

        super(_Numeric, self).validate(value)

        if value is None:
            return None

        value = self.convert(value)

        if isinstance(value, float) and not math.isfinite(value):
            # NaN / Inf
            raise ValueError(f"must be finite, got {value!r}")

        if self._MIN is not None and value < self._MIN:
            # Out of range
            raise ValueError(f"must be >= {self._MIN}, got {value!r}")

        if self._MAX is not None and value > self._MAX:
            # Out of range
            raise ValueError(f"must be <= {self._MAX}, got {value!r}")

    def describe(self) -> t.Dict[str, t.Any]:
        return {
            **super(_Numeric, self).describe(),
            "min": self._MIN,
            "max": self._MAX
        }

    def __class_getitem__(cls, bounds: t.Tuple[t.Optional[N], t.Optional[N]]) -> t.Type["_Numeric"]:
        """
        Set inclusive range

        Args:
            bounds (t.Tuple[t.Optional[N], t.Optional[N]]): Lower and upper bound (None = open)

        Returns:
            t.Type[_Numeric]: Bounded field type
        """

        try:
            # Unpack parameters
            low, high = bounds

        except (TypeError, ValueError):
            # No params
            raise TypeError(f"Lower and upper bound must be specified for type {cls.type}")

        if low is not None and high is not None and high < low:
            # Invalid parameters
            raise ValueError(f"Upper bound could not be less than lower bound for type {cls.type}")

        return t.cast(
            t.Type["_Numeric"],
            type(
                f"{cls.__name__}_{low}_{high}",
                (cls, ),
                {
                    "type": cls.type + f"[{low}, {high}]",
                    "_MIN": low,
                    "_MAX": high
                }
            )
        )


class Integer(_Numeric):
    """
    Integer field
    """

    type = "int"
    _TYPES = {int}

    @classmethod
    def convert(cls, value: t.Any) -> int:
        """
        Convert value to int, refusing lossy float conversion
        """

        if isinstance(value, float):
            if not value.is_integer():
                raise TypeError(f"expected an integer, got {value!r}")

            return int(value)

        if isinstance(value, bool):
            raise TypeError(f"expected an integer, got {value!r}")

        return super(Integer, cls).convert(value)


class Float(_Numeric):
    """
    Floating-point field
    """

    type = "float"
    _TYPES = {float}

    @classmethod
    def convert(cls, value: t.Any) -> float:
        if isinstance(value, bool):
            raise TypeError(f"expected a number, got {value!r}")

        return super(Float, cls).convert(value)


__all__ = (
    "Integer",
    "Float"
)
