# coding=utf-8

import typing as t
from math import inf

from ..core import Field


class String(Field[str]):
    """
    String field
    """

    type = "str"
    _TYPES = {str}

    # Undefined length
    _LEN: int = inf

    def __class_getitem__(cls, length: t.Optional[int] = None) -> t.Type["String"]:
        """
        Set maximal length

        Args:
            length (t.Optional[int]): Maximal string length

        Returns:
            t.Type[String]: String field type
        """

        if not length:
            # No length specified
            return cls

        elif not isinstance(length, int) or length <= 0:
            # Invalid length
            raise TypeError(f"Invalid length specified for field of type {cls.type}")

        return t.cast(
            t.Type["String"],
            type(
                f"{cls.__name__}_{length}",
                (cls, ),
                {
                    "type": cls.type + f"[{length}]",
                    "_LEN": length
                }
            )
        )

    def validate(self, value: t.Any) -> None:
        super(String, self).validate(value)

        if value is not None and len(self.convert(value)) > self._LEN:
            # Too long
            raise ValueError(f"must be at most {self._LEN} characters long")


class Choice(String):
    """
    String field restricted to a set of options
    """

    type = "choice"

    _OPTIONS: t.Tuple[str, ...] = ()

    def __class_getitem__(cls, options: t.Union[str, t.Tuple[str, ...]]) -> t.Type["Choice"]:
        """
        Set allowed options

        Args:
            options (t.Union[str, t.Tuple[str, ...]]): Allowed values

        Returns:
            t.Type[Choice]: Choice field type
        """

        if isinstance(options, str):
            options = (options, )

        if not options or not all(isinstance(option, str) for option in options):
            # Invalid options
            raise TypeError(f"Options must be non-empty strings for type {cls.type}")

        return t.cast(
            t.Type["Choice"],
            type(
                f"{cls.__name__}_{'_'.join(options)}",
                (cls, ),
                {
                    "type": f"{cls.type}{{{', '.join(options)}}}",
                    "_OPTIONS": tuple(options)
                }
            )
        )

    def validate(self, value: t.Any) -> None:
        super(Choice, self).validate(value)

        if value is not None and self.convert(value) not in self._OPTIONS:
            # Unknown option
            raise ValueError(f"must be one of {', '.join(self._OPTIONS)}, got {value!r}")

    def describe(self) -> t.Dict[str, t.Any]:
        return {
            **super(Choice, self).describe(),
            "options": list(self._OPTIONS)
        }


__all__ = (
    "String",
    "Choice"
)
