# coding=utf-8

import json
import typing as t
from re import match
from abc import ABCMeta
from pathlib import Path

from tabulate import tabulate

from errors import ConfigError


T = t.TypeVar("T")

Record = t.Dict[str, t.Any]


class Field(t.Generic[T], metaclass=ABCMeta):
    """
    Typed schema field (descriptor)
    """

    type: str  # Human-readable type name
    _TYPES: t.Set[t.Type]  # Compatible types

    __slots__ = (
        "name",
        "required",
        "help",
        "schema",
        "_default",
    )

    def __init__(
            self,
            name: str,
            required: bool = True,
            default: t.Union[T, t.Callable[[], T], None] = None,
            help: str = ""
    ):
        """
        Initialize schema field

        Args:
            name (str): Field name (only letters, digits and underscores)
            required (bool): If True, None is not an accepted value
            default (t.Union[T, t.Callable[[], T], None]): Value (or factory) used if no value given
            help (str): Short description shown by the command line and in schema dumps

        Raises:
            ValueError: If name contains invalid characters (not in range [A-Za-z0-9_])
        """

        if not match(r"^[A-Za-z_][A-Za-z0-9_]*$", name):
            # Invalid name
            raise ValueError(f"Invalid field name {name!r}")

        self.name = name
        self.required = bool(required)
        self.help = help
        self.schema = None

        # Default value
        self._default = default

    def __set_name__(self, owner: "MetaSchema", attr: str) -> None:
        self.schema = owner

    def __get__(self, instance: t.Optional["BaseSchema"], owner: "MetaSchema") -> t.Union[T, "Field[T]"]:
        """
        Get field instance or value

        Args:
            instance (t.Optional[BaseSchema]): If specified, then value of this field returned
            owner (MetaSchema): Schema class

        Returns:
            t.Union[T, Field[T]]: Get either field value or field instance
        """

        if isinstance(instance, BaseSchema):
            # Instance specified
            return instance._values.get(self.name, self.default)

        return self

    def __set__(self, instance: "BaseSchema", value: t.Any) -> None:
        """
        Set field value (converted, not yet validated)

        Args:
            instance (BaseSchema): Schema instance
            value (t.Any): Field value you want to set
        """

        instance._values[self.name] = None if value is None else self.convert(value)

    def __hash__(self) -> int:
        return hash((self.schema, self.name))

    @classmethod
    def convert(cls, value: t.Any) -> T:
        """
        Convert specified value to field type

        Args:
            value (t.Any): Value you want to convert

        Raises:
            TypeError: If value is not compatible with type
        """

        if type(value) in cls._TYPES:
            # Valid type
            return value

        for _type in cls._TYPES:
            try:
                # Convert value to type
                return _type(value)

            except Exception:
                # Failed
                pass

        raise TypeError(
            f"Could not convert value of type {type(value).__name__} "
            f"to be compatible with field of type {cls.type}"
        )

    def validate(self, value: t.Any) -> None:
        """
        Check if value is valid for field type

        Args:
            value (t.Any): Value you want to validate

        Raises:
            ValueError: If value is None for a required field
            TypeError: If invalid value type provided
        """

        if value is None:
            if self.required:
                # Missing value
                raise ValueError("value is required")

            return None

        try:
            # Check if compatible
            self.convert(value)

        except (TypeError, ValueError):
            # Invalid type
            raise TypeError(f"invalid value for type {self.type} - {value!r}")

    @property
    def default(self) -> t.Optional[T]:
        """
        Get default field value
        """

        if callable(self._default):
            # Factory
            return self._default()

        return self._default

    def describe(self) -> Record:
        """
        Describe field for schema dumps
        """

        return {
            "name": self.name,
            "type": self.type,
            "required": self.required,
            "default": self.default,
            "help": self.help
        }

    def __str__(self) -> str:
        owner = getattr(self.schema, "__name__", "?")
        return f"{owner}.{self.name}"


class MetaSchema(ABCMeta):
    """
    Schema metaclass
    """

    @property
    def fields(cls) -> t.List[Field]:
        """
        Get schema fields in declaration order (base classes first)
        """

        fields: t.Dict[str, Field] = {}

        for klass in reversed(cls.__mro__):
            for attr, value in vars(klass).items():
                if isinstance(value, Field):
                    # Overrides keep their original position
                    fields[attr] = value

        return list(fields.values())

    @property
    def field_names(cls) -> t.List[str]:
        return [field.name for field in cls.fields]

    def print(cls, records: t.Sequence["BaseSchema"], tablefmt: str = "grid") -> str:
        """
        Render specified records as a text table

        Args:
            records (t.Sequence[BaseSchema]): Records you want to render
            tablefmt (str): tabulate table format

        Returns:
            str: Rendered table
        """

        if not all(isinstance(record, cls) for record in records):
            # Invalid records
            raise TypeError(f"Cannot print records of different schemas as {cls.__name__}")

        return tabulate(
            [
                cls.field_names,  # Header
                *[[getattr(record, name) for name in cls.field_names] for record in records]  # Rows
            ],
            tablefmt=tablefmt,
            headers="firstrow"
        )

    def from_dict(cls, data: t.Mapping[str, t.Any], strict: bool = True) -> "BaseSchema":
        """
        Build validated record from mapping

        Args:
            data (t.Mapping[str, t.Any]): Raw field values
            strict (bool): If True, unknown keys are reported as errors

        Raises:
            ConfigError: If any field is invalid (all failures reported at once)
        """

        errors: t.Dict[str, str] = {}
        known = set(cls.field_names)

        for key in data:
            if key not in known and strict:
                # Unknown key
                errors[key] = "unknown field"

        record = cls.__new__(cls)
        record._values = {}

        for field in cls.fields:
            if field.name not in data:
                continue

            try:
                setattr(record, field.name, data[field.name])

            except (TypeError, ValueError) as error:
                # Conversion failed
                errors[field.name] = str(error)

        if errors:
            raise ConfigError(f"Invalid {cls.__name__}", errors)

        record.validate()
        return record

    def load(cls, path: t.Union[str, Path]) -> "BaseSchema":
        """
        Load record from JSON file

        Args:
            path (t.Union[str, Path]): JSON file path

        Raises:
            ConfigError: If file is not a JSON object or fields are invalid
        """

        with open(path, "rt") as record_file:
            try:
                data = json.load(record_file)

            except json.JSONDecodeError as error:
                # Broken file
                raise ConfigError(f"Could not parse {path}: {error}")

        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a JSON object")

        return cls.from_dict(data)

    def schema(cls) -> Record:
        """
        Describe schema (name, version, fields)
        """

        return {
            "schema": cls.__name__,
            "version": getattr(cls, "__version__", 1),
            "fields": [field.describe() for field in cls.fields]
        }


class BaseSchema(metaclass=MetaSchema):
    """
    Base schema record
    """

    __version__: int = 1

    _values: Record

    def __init__(self, **values: t.Any) -> None:
        """
        Initialize schema record

        Raises:
            ConfigError: If unknown fields are given or values are invalid
        """

        errors = {name: "unknown field" for name in values if name not in type(self).field_names}
        self._values = {}

        for name, value in values.items():
            if name in errors:
                continue

            try:
                # Set field value
                setattr(self, name, value)

            except (TypeError, ValueError) as error:
                # Conversion failed
                errors[name] = str(error)

        if errors:
            raise ConfigError(f"Invalid {type(self).__name__}", errors)

        self.validate()

    def validate(self) -> None:
        """
        Validate every field

        Raises:
            ConfigError: Listing every invalid field
        """

        errors: t.Dict[str, str] = {}

        for field in type(self).fields:
            try:
                field.validate(getattr(self, field.name))

            except (TypeError, ValueError) as error:
                errors[field.name] = str(error)

        errors.update(self._check())

        if errors:
            raise ConfigError(f"Invalid {type(self).__name__}", errors)

    def _check(self) -> t.Dict[str, str]:
        """
        Cross-field checks, overridden by schemas that need them
        """

        return {}

    def to_dict(self) -> Record:
        """
        Get all field values (defaults resolved)
        """

        return {field.name: getattr(self, field.name) for field in type(self).fields}

    def replace(self, **values: t.Any) -> "BaseSchema":
        """
        Copy record with some fields replaced
        """

        return type(self).from_dict({**self.to_dict(), **values})

    def __eq__(self, other: object) -> bool:
        return type(other) is type(self) and other.to_dict() == self.to_dict()

    def __repr__(self) -> str:
        fields = ", ".join(f"{name}={value!r}" for name, value in self.to_dict().items())
        return f"{type(self).__name__}({fields})"


__all__ = (
    "Field",
    "MetaSchema",
    "BaseSchema",
    "Record"
)
