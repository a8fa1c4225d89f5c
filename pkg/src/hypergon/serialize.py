"""JSON documents for the command-line tools.

Every document carries ``"schema": "hypergon/1"``. Floats are written with 17
significant digits so that reading a file back reproduces the same doubles,
and the writer is deterministic (fixed key order, fixed layout).
"""

from __future__ import annotations

import json
import math
import sys
from typing import Any

import numpy as np

from . import SCHEMA
from .bending import ActionAngle
from .borel import BElem
from .gaussmap import Configuration
from .hyp3 import HPoint
from .moduli import EPolygon, HPolygon


class SchemaError(ValueError):
    """A document is malformed or has the wrong schema."""


def _fmt(x: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise SchemaError("cannot serialize a non-finite float")
        s = format(x, ".17g")
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_fmt(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        x = list(x)
        if not x:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in x):
            return "[" + ", ".join(_fmt(v, indent, level + 1) for v in x) + "]"
        items = [pad + _fmt(v, indent, level + 1) for v in x]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise SchemaError(f"cannot serialize {type(x).__name__}")


def dumps(doc: dict, indent: int = 2) -> str:
    return _fmt(doc, indent, 0) + "\n"


def document(kind: str, **fields) -> dict:
    return {"schema": SCHEMA, "type": kind, **fields}


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load(path: str) -> dict:
    try:
        doc = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    return doc


def _field(doc: dict, key: str):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    return doc[key]


def _floats(v, shape=None) -> np.ndarray:
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"expected numbers: {exc}") from exc
    if shape is not None and (arr.ndim != len(shape) or any(s not in (None, d) for s, d in zip(shape, arr.shape))):
        raise SchemaError(f"array of shape {arr.shape} does not fit {shape}")
    return arr


# --------------------------------------------------------------------------
# Encoders
# --------------------------------------------------------------------------

def belem_to_json(b: BElem) -> dict:
    return {"a": b.a, "z_re": b.z.real, "z_im": b.z.imag}


def hpoint_to_json(p: HPoint) -> dict:
    return {"model": p.model, "coords": list(p.coords)}


def hpolygon_doc(poly: HPolygon, **extra) -> dict:
    return document("HPolygon", word=[belem_to_json(b) for b in poly.word], **extra)


def epolygon_doc(poly: EPolygon, **extra) -> dict:
    return document("EPolygon", edges=poly.edges.tolist(), **extra)


def configuration_doc(c: Configuration, **extra) -> dict:
    return document("Configuration", points=c.points.tolist(), weights=c.weights.tolist(), **extra)


def hpoint_doc(p: HPoint, **extra) -> dict:
    return document("HPoint", **hpoint_to_json(p), **extra)


def action_angle_to_json(aa: ActionAngle) -> dict:
    return {"l": list(aa.l), "theta": list(aa.theta)}


def su2_to_json(k: np.ndarray) -> list[float]:
    """``[[a, b], [-conj(b), conj(a)]]`` as the quaternion ``(Re a, Im a, Re b, Im b)``."""
    return [k[0, 0].real, k[0, 0].imag, k[0, 1].real, k[0, 1].imag]


# --------------------------------------------------------------------------
# Decoders
# --------------------------------------------------------------------------

def belem_from_json(d) -> BElem:
    try:
        return BElem(float(d["a"]), complex(float(d.get("z_re", 0.0)), float(d.get("z_im", 0.0))))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad BElem: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def hpolygon_from_doc(doc: dict) -> HPolygon:
    word = _field(doc, "word")
    if not isinstance(word, list) or not word:
        raise SchemaError("word must be a nonempty list")
    return HPolygon(tuple(belem_from_json(b) for b in word))


def epolygon_from_doc(doc: dict) -> EPolygon:
    edges = _floats(_field(doc, "edges"), (None, 3))
    try:
        return EPolygon(edges)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def configuration_from_doc(doc: dict) -> Configuration:
    pts = _floats(_field(doc, "points"), (None, 3))
    w = _floats(_field(doc, "weights"), (None,))
    try:
        return Configuration(pts, w)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def weights_from_doc(doc: dict) -> np.ndarray:
    r = _floats(_field(doc, "r"), (None,))
    if len(r) < 3 or not np.all(r > 0):
        raise SchemaError("weights need at least three positive entries")
    return r


def hpoint_from_json(d: dict) -> HPoint:
    try:
        return HPoint(d["model"], tuple(d["coords"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad HPoint: {exc}") from exc


def action_angle_from_json(d: dict) -> ActionAngle:
    try:
        return ActionAngle(tuple(d["l"]), tuple(d["theta"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad ActionAngle: {exc}") from exc
