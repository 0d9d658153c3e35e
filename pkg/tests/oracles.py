"""Independent brute-force oracles shared by the test modules."""
from collections import deque

import numpy as np

N4 = [(0, 1), (0, -1), (1, 0), (-1, 0)]
N8 = N4 + [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def flood_components(mask, nbrs):
    """Brute-force BFS oracle: list of pixel sets."""
    ny, nx = mask.shape
    seen = np.zeros_like(mask)
    comps = []
    for y in range(ny):
        for x in range(nx):
            if mask[y, x] and not seen[y, x]:
                comp, q = [], deque([(y, x)])
                seen[y, x] = True
                while q:
                    a, b = q.popleft()
                    comp.append((a, b))
                    for dy, dx in nbrs:
                        c, d = a + dy, b + dx
                        if 0 <= c < ny and 0 <= d < nx and mask[c, d] and not seen[c, d]:
                            seen[c, d] = True
                            q.append((c, d))
                comps.append(comp)
    return comps


def brute_report(esc):
    ny, nx = esc.shape
    comps = flood_components(esc, N4)
    holes = [c for c in flood_components(~esc, N8)
             if not any(y in (0, ny - 1) or x in (0, nx - 1) for y, x in c)]
    boxes = sorted((min(y for y, _ in c), min(x for _, x in c), max(y for y, _ in c), max(x for _, x in c))
                   for c in holes)
    largest = max((len(c) for c in comps), default=0) / max(1, int(esc.sum()))
    return len(comps), len(holes), boxes, largest
