"""Linear layouts over GF(2) for GPU tensor placement."""

import json as _json

from ._core import Layout, LayoutError, blocked, mma, swizzle
from ._core import check_plan_json, plan_convert_json, propagate_json

__all__ = [
    "Layout",
    "LayoutError",
    "blocked",
    "mma",
    "swizzle",
    "plan_convert",
    "check_plan",
    "propagate",
]


def plan_convert(a, b, elem_bits=16, banks="", payload=32):
    """Conversion plan from layout a to layout b, as a dict."""
    return _json.loads(plan_convert_json(a, b, elem_bits, banks, payload))


def check_plan(plan):
    """Simulate a plan (dict or JSON text) and return the report dict."""
    text = plan if isinstance(plan, str) else _json.dumps(plan)
    return _json.loads(check_plan_json(text))


def propagate(graph_text):
    """Layouts, conversions and rematerializations for an op graph."""
    return _json.loads(propagate_json(graph_text))
