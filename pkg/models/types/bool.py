# coding=utf-8

import typing as t

from ..core import Field


class Boolean(Field[bool]):
    """
    Boolean field
    """

    type = "bool"
    _TYPES = {bool}

    @classmethod
    def convert(cls, value: t.Any) -> bool:
        """
        Convert value to bool
        """

        if isinstance(value, str):
            # String value
            return value.strip().lower() not in ("0", "f", "false", "no", "off", "")

        if isinstance(value, int):
            return bool(value)

        return super(Boolean, cls).convert(value)


__all__ = (
    "Boolean",
)
