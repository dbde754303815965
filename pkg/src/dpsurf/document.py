"""JSON documents for configurations and command reports.

A configuration document looks like::

    {
      "N": 2,
      "T": [0.0, 0.0],
      "levels": [[[1.0, 0.0]], [[-1.0, 0.0]]],
      "name": "alternating(2)",
      "provenance": "catalog"
    }

Complex numbers are ``[re, im]`` pairs everywhere.  ``name`` and
``provenance`` are optional.  Floats are written with ``repr`` precision, so a
document re-read reproduces the configuration bit for bit.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .config import Configuration


class DocumentError(ValueError):
    """A document could not be parsed; ``location`` says where."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def _pair(value, path):
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise DocumentError("expected a [re, im] pair of numbers", path)
    if not all(math.isfinite(x) for x in value):
        raise DocumentError("non-finite number", path)
    return complex(value[0], value[1])


def parse_config(text: str, source: str = "<input>") -> Configuration:
    """Parse a configuration document.

    Raises
    ------
    DocumentError
        With ``location`` set to ``source:line:column`` for malformed JSON,
        or to the key path (``levels[1][0]``) for schema violations.
    ValueError, DegenerateConfigurationError
        If the document is well formed but the configuration is invalid.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    if not isinstance(doc, dict):
        raise DocumentError("top level must be an object", source)
    for key in ("N", "levels"):
        if key not in doc:
            raise DocumentError(f"missing key {key!r}", source)
    N = doc["N"]
    if not isinstance(N, int) or isinstance(N, bool):
        raise DocumentError("expected an integer", "N")
    levels = doc["levels"]
    if not isinstance(levels, list):
        raise DocumentError("expected an array of levels", "levels")
    if len(levels) != N:
        raise DocumentError(f"N = {N} but {len(levels)} levels are given", "levels")
    pts = []
    for k, lvl in enumerate(levels):
        if not isinstance(lvl, list) or not lvl:
            raise DocumentError("expected a non-empty array of points", f"levels[{k}]")
        pts.append([_pair(p, f"levels[{k}][{i}]") for i, p in enumerate(lvl)])
    T = _pair(doc["T"], "T") if "T" in doc else 0j
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise DocumentError("expected a string", "name")
    return Configuration(pts, T, name=name)


def to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pairs(arr) -> list:
    return [to_pair(z) for z in np.asarray(arr).ravel()]


def config_document(config: Configuration, provenance: str | None = None) -> dict:
    doc = {"N": config.N, "T": to_pair(config.T), "levels": [pairs(l) for l in config.levels]}
    if config.name:
        doc["name"] = config.name
    if provenance:
        doc["provenance"] = provenance
    return doc


def _plain(obj):
    """Recursively convert numpy and complex values to JSON types."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): _plain(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return to_pair(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps(doc) -> str:
    return json.dumps(_plain(doc), indent=2)
