import dataclasses
import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, get_args, get_origin


def jsonable(value: Any) -> Any:
    """Converts containers used across the package into plain JSON values.

    Sets are emitted sorted so that equal objects always serialize to the same string.
    """
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if hasattr(value, "asdict"):
        return value.asdict()
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if hasattr(value, "item"):
        # numpy scalars
        return value.item()
    raise TypeError(f"Cannot serialize value of type {type(value).__name__}.")


@dataclass
class Serializable:
    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, self.__class__):
            return False
        return self.asdict() == other.asdict()

    @classmethod
    def fromdict(cls, data: Dict[str, Any]) -> "Serializable":
        data_ = {}
        for field in dataclasses.fields(cls):
            if field.name not in data:
                if (
                    field.default is dataclasses.MISSING
                    and field.default_factory is dataclasses.MISSING
                ):
                    raise ValueError(
                        f"Required {field.name} is missing from the data provided."
                    )
                continue

            field_type = field.type
            value = data[field.name]
            if value is None:
                data_[field.name] = None
            elif isinstance(field_type, type) and issubclass(field_type, Serializable):
                data_[field.name] = field_type.fromdict(value)
            elif get_origin(field_type) == list and hasattr(
                get_args(field_type)[0], "fromdict"
            ):
                data_[field.name] = [get_args(field_type)[0].fromdict(v) for v in value]
            else:
                data_[field.name] = value
        return cls(**data_)

    @classmethod
    def from_dict(cls, data) -> "Serializable":
        return cls.fromdict(data)

    def to_dict(self) -> Dict[str, Any]:
        return self.asdict()

    def to_json(self, indent: int = None) -> str:
        return json.dumps(self.asdict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json_string(cls, string: str) -> "Serializable":
        return cls.fromdict(json.loads(string))

    def asdict(self, skip_fields=None) -> Dict[str, Any]:
        """Serialize the dataclass to a dictionary of JSON-compatible values.

        Args:
            skip_fields: List of fields to skip when serializing.

        Returns:
            A dictionary representation, tagged with `class_name`.
        """
        data = {}
        for field in dataclasses.fields(self):
            if skip_fields and field.name in skip_fields:
                if (
                    field.default is dataclasses.MISSING
                    and field.default_factory is dataclasses.MISSING
                ):
                    raise ValueError("Cannot skip required field in dataclass!")
                continue
            data[field.name] = jsonable(getattr(self, field.name))
        data["class_name"] = f"{self.__class__.__module__}.{self.__class__.__name__}"
        return data
