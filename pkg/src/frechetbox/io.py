"""Reading and writing curve files.

Text format: a ``d n`` header line followed by ``n`` lines of ``d``
whitespace-separated coordinates.  Blank lines and ``#`` comments are
ignored.  A JSON object ``{"dim": d, "vertices": [[...], ...]}`` is accepted
as well.
"""

from __future__ import annotations

import io
import json
import os
from typing import TextIO, Union

from .geometry import Curve, DegenerateInputError

__all__ = ["CurveFormatError", "parse_curve", "parse_curve_text", "write_curve", "format_float"]


class CurveFormatError(ValueError):
    """Malformed curve file."""


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def _parse_json(text: str, name: str) -> Curve:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveFormatError(f"{name}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise CurveFormatError(f"{name}: JSON curve needs a 'vertices' list")
    verts = obj["vertices"]
    dim = obj.get("dim")
    if not isinstance(verts, list) or not verts:
        raise CurveFormatError(f"{name}: 'vertices' must be a non-empty list")
    for k, v in enumerate(verts):
        if not isinstance(v, list) or not all(isinstance(c, (int, float)) for c in v):
            raise CurveFormatError(f"{name}: vertex {k} is not a list of numbers")
        if dim is None:
            dim = len(v)
        if len(v) != dim:
            raise CurveFormatError(f"{name}: vertex {k} has dimension {len(v)}, expected {dim}")
    try:
        return Curve(verts)
    except DegenerateInputError as exc:
        raise CurveFormatError(f"{name}: {exc}") from None


def parse_curve_text(text: str, name: str = "<curve>") -> Curve:
    """Parse curve file contents (text or JSON)."""
    if text.lstrip().startswith("{"):
        return _parse_json(text, name)
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise CurveFormatError(f"{name}:{lineno}: header must be 'd n'")
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError:
                raise CurveFormatError(f"{name}:{lineno}: header must hold two integers") from None
            if header[0] < 1 or header[1] < 1:
                raise CurveFormatError(f"{name}:{lineno}: dimension and vertex count must be positive")
            continue
        if len(fields) != header[0]:
            raise CurveFormatError(f"{name}:{lineno}: expected {header[0]} coordinates, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise CurveFormatError(f"{name}:{lineno}: malformed number in {line!r}") from None
        if len(rows) > header[1]:
            raise CurveFormatError(f"{name}:{lineno}: more vertices than the header declares")
    if header is None:
        raise CurveFormatError(f"{name}: empty curve file")
    if len(rows) != header[1]:
        raise CurveFormatError(f"{name}: header declares {header[1]} vertices, found {len(rows)}")
    try:
        return Curve(rows)
    except DegenerateInputError as exc:
        raise CurveFormatError(f"{name}: {exc}") from None


def parse_curve(source: Union[str, os.PathLike, TextIO]) -> Curve:
    """Read a curve from a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return parse_curve_text(fh.read(), os.fspath(source))
    return parse_curve_text(source.read(), getattr(source, "name", "<stream>"))


def write_curve(curve, dest=None, fmt: str = "text") -> str:
    """Serialize ``curve``; write to ``dest`` (path or stream) if given and return the text."""
    curve = curve if isinstance(curve, Curve) else Curve(curve)
    if fmt == "json":
        text = json.dumps({"dim": curve.dim, "vertices": curve.vertices.tolist()}) + "\n"
    elif fmt == "text":
        buf = io.StringIO()
        buf.write(f"{curve.dim} {len(curve)}\n")
        for row in curve.vertices.tolist():
            buf.write(" ".join(format_float(x) for x in row) + "\n")
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown curve format {fmt!r}")
    if dest is None:
        return text
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        dest.write(text)
    return text
