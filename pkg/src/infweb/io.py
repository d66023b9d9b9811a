"""Domain files, CSV tables and JSON reports.

Domain files are YAML or JSON mappings such as::

    kind: polygon
    label: square
    vertices: [[0, "sqrt(2)"], ["2*sqrt(2)", "-sqrt(2)"], ...]

Coordinates may be numbers or arithmetic strings using ``+ - * / **``,
parentheses, ``sqrt`` and ``pi``. Floats are written with 17 significant
digits so every table reads back to the same binary values.
"""

from __future__ import annotations

import ast
import csv
import json
import math
import operator
from pathlib import Path

import numpy as np
import yaml

from .domains import Domain, make_disk, make_polygon, make_stadium
from .errors import DegenerateBoundary, ParseError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt}
_NAMES = {"pi": math.pi}


def fmt(v) -> str:
    return f"{float(v):.17g}"


def eval_number(value) -> float:
    """Evaluate a number or a restricted arithmetic expression string."""
    if isinstance(value, bool):
        raise ParseError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"expected a number or expression, got {value!r}")
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ParseError(f"unsupported element in {value!r}")

    try:
        out = ev(tree)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise ParseError(f"cannot evaluate {value!r}: {exc}") from exc
    if not math.isfinite(out):
        raise ParseError(f"{value!r} is not finite")
    return out


def _point(raw, what: str):
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ParseError(f"{what} must be a pair [x, y], got {raw!r}")
    return (eval_number(raw[0]), eval_number(raw[1]))


def domain_from_mapping(mapping: dict) -> Domain:
    """Build a domain from a parsed mapping.

    Raises:
        ParseError: malformed or missing fields, or invalid geometry.
    """
    if not isinstance(mapping, dict) or "kind" not in mapping:
        raise ParseError("domain file must be a mapping with a 'kind' field")
    kind = mapping["kind"]
    label = str(mapping.get("label", kind))
    try:
        if kind == "polygon":
            verts = mapping.get("vertices")
            if not isinstance(verts, list):
                raise ParseError("polygon needs a 'vertices' list")
            return make_polygon([_point(v, "vertex") for v in verts], label)
        if kind == "disk":
            return make_disk(_point(mapping.get("center", [0, 0]), "center"), eval_number(mapping["radius"]), label)
        if kind == "stadium":
            return make_stadium(_point(mapping["a"], "a"), _point(mapping["b"], "b"), eval_number(mapping["r"]), label)
    except KeyError as exc:
        raise ParseError(f"{kind} entry is missing field {exc}") from exc
    except DegenerateBoundary as exc:
        raise ParseError(f"invalid {kind}: {exc}") from exc
    raise ParseError(f"unknown domain kind {kind!r}")


def load_domain(path) -> Domain:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        mapping = yaml.safe_load(text)  # YAML is a superset of JSON
    except yaml.YAMLError as exc:
        raise ParseError(f"{path} is not valid YAML/JSON: {exc}") from exc
    return domain_from_mapping(mapping)


def write_csv(path, header: list[str], columns: list) -> None:
    """Write equal-length columns; floats use 17 significant digits."""
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([str(int(v)) if np.issubdtype(type(v), np.integer) else fmt(v) for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        vals = [r[j] for r in body]
        try:
            out[name] = np.array([int(v) for v in vals], dtype=np.int64)
        except ValueError:
            out[name] = np.array([float(v) for v in vals])
    return out


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def write_report(path, data: dict) -> None:
    """JSON report; floats use the shortest repr that reads back exactly."""
    Path(path).write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_dense(path, xs: np.ndarray, ys: np.ndarray, values: np.ndarray, h: float) -> None:
    """Row-major lattice dump: one row per ``y`` (bottom to top), NaN outside.

    The two header lines record extents, spacing and shape.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# x_min={fmt(xs[0])} x_max={fmt(xs[-1])} y_min={fmt(ys[0])} "
            f"y_max={fmt(ys[-1])} h={fmt(h)}\n"
        )
        fh.write(f"# nx={len(xs)} ny={len(ys)}\n")
        for j in range(len(ys)):
            fh.write(",".join(fmt(v) for v in values[:, j]) + "\n")


def read_dense(path) -> tuple[dict, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = {}
    for line in lines[:2]:
        for item in line.lstrip("# ").split():
            k, v = item.split("=")
            meta[k] = float(v) if k not in ("nx", "ny") else int(v)
    rows = [[float(v) for v in line.split(",")] for line in lines[2:]]
    return meta, np.array(rows).T
