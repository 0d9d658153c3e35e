"""Connected components of the escaping mask and bounded holes in it."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

_N4 = ((0, 1), (1, 0))
_N8 = ((0, 1), (1, 0), (1, 1), (1, -1))


def label_components(mask, connectivity=4):
    """Label True pixels of ``mask``; returns (labels, count), background 0.

    Labels are numbered 1..count in raster order of each component's first pixel.
    """
    mask = np.asarray(mask, bool)
    ny, nx = mask.shape
    offsets = _N4 if connectivity == 4 else _N8
    heads, tails = [], []
    idx = np.arange(ny * nx).reshape(ny, nx)
    for dy, dx in offsets:
        y1 = ny - dy
        x0, x1 = max(0, -dx), nx - max(0, dx)
        both = mask[:y1, x0:x1] & mask[dy:, x0 + dx:x1 + dx]
        heads.append(idx[:y1, x0:x1][both])
        tails.append(idx[dy:, x0 + dx:x1 + dx][both])
    parent = _hook(ny * nx, np.concatenate(heads), np.concatenate(tails))
    labels = np.zeros((ny, nx), dtype=np.int64)
    flat = np.flatnonzero(mask)
    roots = parent[flat]
    # roots are the smallest index of their component, hence in raster order
    uniq, inv = np.unique(roots, return_inverse=True)
    labels.flat[flat] = inv + 1
    return labels, len(uniq)


def _hook(n, a, b):
    """Vectorised union-find: hook larger roots under smaller ones and compress
    until every edge joins pixels with a common root."""
    parent = np.arange(n)
    while True:
        while True:
            nxt = parent[parent]
            if np.array_equal(nxt, parent):
                break
            parent = nxt
        ra, rb = parent[a], parent[b]
        diff = ra != rb
        if not diff.any():
            return parent
        lo = np.minimum(ra[diff], rb[diff])
        hi = np.maximum(ra[diff], rb[diff])
        np.minimum.at(parent, hi, lo)


@dataclass
class ConnectivityReport:
    """Component structure of an escaping mask.

    Escaping pixels are joined across edges (4-connectivity); the non-escaping
    complement uses 8-connectivity, the dual choice, so that a closed 4-connected
    ring of escaping pixels always separates its inside from the frame.  Holes are
    candidate holes only: a grid cannot decide whether I(f) has one.
    """

    escaping_components: int
    hole_components: int
    largest_component_fraction: float
    hole_bounding_boxes: list
    escaping_pixels: int
    total_pixels: int

    def to_dict(self):
        d = asdict(self)
        d["hole_bounding_boxes"] = [{"row0": b[0], "col0": b[1], "row1": b[2], "col1": b[3]}
                                    for b in self.hole_bounding_boxes]
        d["label"] = "candidate holes in the grid approximation of I(f)"
        return d


def find_holes(escaping):
    """Non-escaping 8-components that do not touch the frame, as (labels, ids)."""
    esc = np.asarray(escaping, bool)
    labels, n = label_components(~esc, 8)
    frame = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    ids = [k for k in range(1, n + 1) if k not in frame]
    return labels, ids


def connectivity(grid):
    """Escaping components and candidate holes of an EscapeGrid or a bool mask."""
    esc = np.asarray(grid.escaping if hasattr(grid, "escaping") else grid, bool)
    labels, n = label_components(esc, 4)
    if n:
        sizes = np.bincount(labels.ravel())[1:]
        largest = float(sizes.max() / sizes.sum())
    else:
        largest = 0.0
    hl, ids = find_holes(esc)
    boxes = []
    for k in ids:
        ys, xs = np.nonzero(hl == k)
        boxes.append((int(ys.min()), int(xs.min()), int(ys.max()), int(xs.max())))
    return ConnectivityReport(n, len(ids), largest, boxes, int(esc.sum()), int(esc.size))
