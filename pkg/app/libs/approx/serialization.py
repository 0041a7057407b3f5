"""Structured text for weights, policies and models

Floats are written with their shortest round-tripping decimal so that
reading back yields bit-identical arrays.
"""
import json
from typing import Any, Dict

from .exc import SerializationError


def dumps(payload: Dict[str, Any]) -> str:
    try:
        return json.dumps(payload, sort_keys=True, indent=1, allow_nan=False) + "\n"
    except (TypeError, ValueError) as exp:
        raise SerializationError(f"cannot serialize: {exp}")


def loads(text: str) -> Dict[str, Any]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exp:
        raise SerializationError(f"malformed document: {exp}")
    if not isinstance(payload, dict) or "kind" not in payload:
        raise SerializationError("document has no kind tag")
    return payload
