"""
Compatibility layer between pydantic models, numpy values and JSON.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from typing import Any, Type, TypeVar

import numpy as np

try:
    from pydantic import VERSION as PYDANTIC_VERSION
    PYDANTIC_V2 = PYDANTIC_VERSION.startswith("2.")
except ImportError:
    PYDANTIC_V2 = False

T = TypeVar("T")


def model_validate(cls: Type[T], data: dict) -> T:
    """Validate data and create model instance.

    Works with both Pydantic v1 and v2.
    """
    if PYDANTIC_V2:
        return cls.model_validate(data)  # type: ignore
    else:
        return cls.parse_obj(data)  # type: ignore


def model_dump(instance, exclude_none: bool = False, by_alias: bool = False) -> dict:
    """Dump model to a JSON-ready dict.

    numpy scalars and arrays are converted, non-finite floats become strings.
    """
    if PYDANTIC_V2:
        raw = instance.model_dump(exclude_none=exclude_none, by_alias=by_alias)
    else:
        raw = instance.dict(exclude_none=exclude_none, by_alias=by_alias)
    return to_jsonable(raw)


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy values and non-finite floats for json."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def canonical_json(value: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
