"""Reading and writing contour files, fits and reports.

Contour files are JSON documents::

    {"version": "curvespec/1", "n": 73, "grid": "standard-odd",
     "contours": [[[x, y], ...], ...], "labels": [...]}

``grid`` may instead be an explicit list of angles. Plain text input is also
accepted: two comma- or whitespace-separated columns x, y per line, contours
separated by blank lines.

Floats are written with ``repr``, the shortest string that reads back to the
same double, so every file round-trips bit for bit.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .estimator import ContourStack
from .spectral import Grid, GridError, make_grid

SCHEMA_VERSION = "curvespec/1"


class SchemaError(ValueError):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def stack_to_dict(stack: ContourStack) -> dict:
    d = {
        "version": SCHEMA_VERSION,
        "n": stack.grid.n,
        "grid": "standard-odd" if stack.grid.standard else stack.grid.theta.tolist(),
        "contours": stack.points.tolist(),
    }
    if stack.labels is not None:
        d["labels"] = list(stack.labels)
    return d


def stack_from_dict(d: dict, source: str = "<contours>") -> ContourStack:
    if not isinstance(d, dict):
        raise SchemaError(f"{source}: expected a JSON object")
    if "version" not in d:
        raise SchemaError(f"{source}: field 'version' missing")
    if d["version"] != SCHEMA_VERSION:
        raise SchemaError(f"{source}: field 'version' is {d['version']!r}, expected {SCHEMA_VERSION!r}")
    for key in ("n", "contours"):
        if key not in d:
            raise SchemaError(f"{source}: field '{key}' missing")
    n = d["n"]
    grid_spec = d.get("grid", "standard-odd")
    try:
        if grid_spec == "standard-odd":
            grid = make_grid(n)
        elif isinstance(grid_spec, list):
            grid = Grid.from_angles(grid_spec)
        else:
            raise SchemaError(f"{source}: field 'grid' must be 'standard-odd' or a list of angles")
    except GridError as exc:
        raise SchemaError(f"{source}: field 'grid'/'n': {exc}") from None
    if grid.n != n:
        raise SchemaError(f"{source}: field 'grid' has {grid.n} angles but n={n}")
    contours = d["contours"]
    for t, c in enumerate(contours):
        if len(c) != n:
            raise SchemaError(f"{source}: field 'contours[{t}]' has {len(c)} points, expected n={n}")
    try:
        return ContourStack(grid, np.asarray(contours, dtype=float), d.get("labels"))
    except ValueError as exc:
        raise SchemaError(f"{source}: field 'contours': {exc}") from None


def read_contour_text(path) -> ContourStack:
    """Two columns x, y per line; blank lines separate contours."""
    contours, current = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                if current:
                    contours.append(current)
                    current = []
                continue
            parts = line.replace(",", " ").split()
            try:
                x, y = (float(v) for v in parts)
            except ValueError:
                raise SchemaError(f"{path}: line {lineno}: expected two numbers x, y") from None
            current.append((x, y))
    if current:
        contours.append(current)
    if not contours:
        raise SchemaError(f"{path}: no contours found")
    n = len(contours[0])
    for t, c in enumerate(contours):
        if len(c) != n:
            raise SchemaError(f"{path}: contour {t} has {len(c)} points, expected {n}")
    try:
        grid = make_grid(n)
    except GridError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return ContourStack(grid, np.asarray(contours, dtype=float))


def read_contours(path) -> ContourStack:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".csv", ".txt", ".dat"):
        return read_contour_text(path)
    return stack_from_dict(read_json(path), str(path))


def write_contours(path, stack: ContourStack) -> None:
    write_json(path, stack_to_dict(stack))
