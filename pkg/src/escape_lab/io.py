"""CSV, JSON and PPM/PGM writers.

Floats in CSV are written with 17 significant digits; JSON uses Python's
shortest round-trip repr.  Non-finite floats become the strings "inf",
"-inf" and "nan" so the JSON stays strict.
"""
from __future__ import annotations

import csv
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .escape import PixelClass

BOUNDED_RGB = (0, 0, 0)
UNDETERMINED_RGB = (128, 128, 128)
# escaping ramp: step 0 light, step max_iter dark
_RAMP_LIGHT = np.array([255.0, 236.0, 150.0])
_RAMP_DARK = np.array([140.0, 20.0, 20.0])


def fmt(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def class_image(grid):
    """RGB array for the pixel classes of an EscapeGrid."""
    img = np.empty(grid.classes.shape + (3,), dtype=np.uint8)
    img[...] = UNDETERMINED_RGB
    img[grid.classes == PixelClass.BOUNDED] = BOUNDED_RGB
    esc = grid.classes == PixelClass.ESCAPING
    t = np.clip(grid.steps[esc] / max(1, grid.spec.max_iter), 0.0, 1.0)[:, None]
    img[esc] = np.rint(_RAMP_LIGHT + t * (_RAMP_DARK - _RAMP_LIGHT)).astype(np.uint8)
    return img


def write_ppm(path, rgb):
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(rgb.tobytes())


def write_pgm(path, mask):
    img = np.where(np.asarray(mask, bool), 255, 0).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def read_pnm(path):
    """Minimal reader for the files written above (no comments)."""
    data = Path(path).read_bytes()
    magic, w, h, _ = data.split(maxsplit=4)[:4]
    w, h = int(w), int(h)
    # the header ends with exactly one whitespace byte after the maxval
    body = data[len(b"%s\n%d %d\n255\n" % (magic, w, h)):]
    if magic == b"P6":
        return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
    if magic == b"P5":
        return np.frombuffer(body, dtype=np.uint8).reshape(h, w)
    raise ValueError(f"unsupported format {magic!r}")
