import dataclasses
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union, get_args, get_origin


def _to_plain(val):
    if isinstance(val, Enum):
        return val.value
    if isinstance(val, Path):
        return str(val)
    if isinstance(val, dict):
        return {k: _to_plain(v) for k, v in val.items()}
    if isinstance(val, (list, tuple)):
        return [_to_plain(v) for v in val]
    return val


def convert_to_dict(data) -> Dict[str, Any]:
    if dataclasses.is_dataclass(data):
        data = dataclasses.asdict(data)
    return _to_plain(data)


def _unwrap_optional(t):
    if get_origin(t) is Union:
        args = [a for a in get_args(t) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return t


def convert_from_dict(cls, data):
    if data is None:
        data = {}

    data = dict(data)
    for key, val in data.items():
        if key not in cls.__dataclass_fields__:
            raise ValueError(f"{cls.__name__}: unknown key '{key}'")
        if val is None:
            continue

        child_class = _unwrap_optional(cls.__dataclass_fields__[key].type)
        if child_class == Path:
            data[key] = Path(val)
        elif isinstance(child_class, type) and issubclass(child_class, Enum):
            data[key] = child_class(val)
        elif dataclasses.is_dataclass(child_class):
            data[key] = convert_from_dict(child_class, val)
    return cls(**data)
