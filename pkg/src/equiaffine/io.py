"""File formats: domain JSON, field CSV, levels JSON and SVG."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidDomain, InvalidGrid
from .estimate import ScalarField
from .geometry import ConvexDomain, domain_from_json

SCHEMA = 1


def load_domain(spec: str) -> ConvexDomain:
    """Preset name, inline JSON, or a path to a JSON file."""
    s = spec.strip()
    if s.startswith("{"):
        try:
            return domain_from_json(json.loads(s))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InvalidDomain(f"bad domain JSON: {exc}") from None
    p = Path(s)
    if p.suffix == ".json" or p.exists():
        try:
            return domain_from_json(json.loads(p.read_text(encoding="utf-8")))
        except OSError as exc:
            raise InvalidDomain(f"cannot read domain file: {exc}") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InvalidDomain(f"bad domain JSON: {exc}") from None
    return domain_from_json(s)


def dumps(obj) -> str:
    # repr of a float is the shortest string that round-trips (<= 17 digits)
    return json.dumps(_plain(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def field_to_csv(f: ScalarField) -> str:
    out = _io.StringIO()
    out.write("x,y,value\n")
    for j, y in enumerate(f.ys):
        for i, x in enumerate(f.xs):
            v = f.values[j, i]
            out.write(f"{x:.9g},{y:.9g},{'' if not np.isfinite(v) else format(v, '.9g')}\n")
    return out.getvalue()


def field_from_csv(text: str) -> ScalarField:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "value"]:
        raise InvalidGrid("field CSV must start with the header x,y,value")
    body = [r for r in rows[1:] if r]
    try:
        xy = np.array([[float(r[0]), float(r[1])] for r in body])
        vals = np.array([float(r[2]) if r[2].strip() else math.nan for r in body])
    except (ValueError, IndexError) as exc:
        raise InvalidGrid(f"bad field CSV row: {exc}") from None
    if len(body) == 0:
        raise InvalidGrid("empty field")
    xs = np.unique(xy[:, 0])
    ys = np.unique(xy[:, 1])
    if len(xs) * len(ys) != len(body):
        raise InvalidGrid("field CSV is not a full rectangular grid")
    # rows are written with y outer, x inner
    return ScalarField(xy[:len(xs), 0].copy(), xy[::len(xs), 1].copy(),
                       vals.reshape(len(ys), len(xs)))


def write_field(path, f: ScalarField):
    Path(path).write_text(field_to_csv(f), encoding="utf-8")


def read_field(path) -> ScalarField:
    return field_from_csv(Path(path).read_text(encoding="utf-8"))


def levels_document(entries) -> dict:
    """``entries``: list of (level, contours, metrics-or-None)."""
    out = []
    for level, contours, met in entries:
        out.append({
            "level": float(level),
            "contours": [{"closed": c.closed, "points": c.points.tolist()} for c in contours],
            "metrics": None if met is None else met.to_json(),
        })
    return {"schema": SCHEMA, "levels": out}


_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def levels_svg(entries, bbox, size: int = 600) -> str:
    xmin, xmax, ymin, ymax = bbox
    w = max(xmax - xmin, 1e-300)
    h = max(ymax - ymin, 1e-300)
    s = size / max(w, h)
    W, H = w * s, h * s
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.2f}" height="{H:.2f}" '
             f'viewBox="0 0 {W:.2f} {H:.2f}">',
             f'<rect width="{W:.2f}" height="{H:.2f}" fill="white"/>']
    for k, (level, contours, _) in enumerate(entries):
        color = _COLORS[k % len(_COLORS)]
        for c in contours:
            pts = " L ".join(f"{(x - xmin) * s:.3f} {(ymax - y) * s:.3f}" for x, y in c.points)
            z = " Z" if c.closed else ""
            lines.append(f'<path d="M {pts}{z}" fill="none" stroke="{color}" stroke-width="1" '
                         f'data-level="{level:.9g}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
