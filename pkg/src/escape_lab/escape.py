"""Grid classification of orbits: escaping, bounded, fast-escaping and B_D masks.

Grid classes are finite-time approximations.  A pixel is labelled by iterating
its centre; nothing here is a proof that the point belongs to I(f).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import IntEnum

import numpy as np

from .errors import LadderOverflow, NonConvergentProduct, OverflowDomain, ValidationError
from .functions import LOG_SATURATE, _saturating_exp, log_eval
from .modulus import log_max_modulus

DEFAULT_PIXEL_BUDGET = 2 ** 22


class PixelClass(IntEnum):
    UNDETERMINED = 0
    ESCAPING = 1
    BOUNDED = 2


@dataclass(frozen=True)
class GridSpec:
    center: complex
    width: float
    height: float
    nx: int
    ny: int
    max_iter: int = 64
    bailout: float = 1e6
    confirm_steps: int = 3
    pixel_budget: int = DEFAULT_PIXEL_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (self.width > 0 and self.height > 0):
            raise ValidationError("grid width and height must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValidationError("nx and ny must be at least 1")
        if self.nx * self.ny > self.pixel_budget:
            raise ValidationError(f"{self.nx}x{self.ny} pixels exceed the budget of {self.pixel_budget}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")
        if not self.bailout >= 1e3:
            raise ValidationError("bailout must be at least 1e3")
        if self.confirm_steps < 1:
            raise ValidationError("confirm_steps must be at least 1")

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1, nx, ny, **kw):
        return cls(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), x1 - x0, y1 - y0, nx, ny, **kw)

    def xs(self):
        return self.center.real - self.width / 2 + (np.arange(self.nx) + 0.5) * self.width / self.nx

    def ys(self):
        # row 0 is the top of the picture
        return self.center.imag + self.height / 2 - (np.arange(self.ny) + 0.5) * self.height / self.ny

    def points(self):
        return self.xs()[None, :] + 1j * self.ys()[:, None]

    def to_dict(self):
        d = asdict(self)
        d["center"] = [self.center.real, self.center.imag]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        c = d.pop("center")
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        return cls(complex(c), **d)


@dataclass
class EscapeGrid:
    """Per-pixel classes plus the orbit data needed by the fast and B_D tests.

    ``orbit_logs`` maps a flat pixel index to the recorded ``log|f^k(z)|``
    (k = 0, 1, ...) for Escaping pixels only; other pixels are never marked.
    """

    spec: GridSpec
    function_digest: str
    classes: np.ndarray
    steps: np.ndarray
    fast_mask: np.ndarray
    bd_mask: np.ndarray
    orbit_logs: dict = field(repr=False, default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def escaping(self):
        return self.classes == PixelClass.ESCAPING

    def inclusion_violations(self):
        """Pixel counts breaking bd_mask <= fast_mask <= Escaping."""
        return (int(np.sum(self.bd_mask & ~self.fast_mask)),
                int(np.sum(self.fast_mask & ~self.escaping)))

    def counts(self):
        return {c.name.lower(): int(np.sum(self.classes == c)) for c in PixelClass}


def _iterate_row(f, zs, n_steps, log_bail):
    """Iterate a row of starting points; returns the (nx, n_steps+1) log-modulus
    table (NaN after an orbit stops) and the per-pixel overflow flag."""
    nx = len(zs)
    logs = np.full((nx, n_steps + 1), np.nan)
    with np.errstate(divide="ignore"):
        logs[:, 0] = np.log(np.abs(zs))
    z = zs.astype(complex)
    alive = np.ones(nx, dtype=bool)
    overflow = np.zeros(nx, dtype=bool)
    for k in range(1, n_steps + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        logf, _ = log_eval(f, z[idx])
        lr = logf.real
        bad = np.isnan(lr)
        logs[idx[~bad], k] = lr[~bad]
        done = bad | (lr > LOG_SATURATE)
        overflow[idx[done]] = True
        alive[idx[done]] = False
        keep = idx[~done]
        z[keep] = _saturating_exp(logf[~done])
    return logs, overflow


def _classify_orbit(logs, overflow, max_iter, confirm, log_bail):
    """Return (class, step) for one recorded orbit."""
    n = int(np.sum(~np.isnan(logs)))
    seq = logs[:n]
    for k in range(min(n, max_iter + 1)):
        if not seq[k] > log_bail:
            continue
        ok = True
        for j in range(1, confirm + 1):
            if k + j >= n:
                # the orbit stopped by overflowing: counts as continued growth
                ok = overflow
                break
            if not seq[k + j] > seq[k + j - 1]:
                ok = False
                break
        if ok:
            return PixelClass.ESCAPING, k
    if n <= max_iter and overflow:
        # overflow at step n <= max_iter is itself an exceedance
        return PixelClass.ESCAPING, n
    head = seq[:max_iter + 1]
    if len(head) == max_iter + 1 and not np.any(head > log_bail):
        tail = head[max_iter // 2:]
        if np.any(tail <= 0.5 * log_bail):
            return PixelClass.BOUNDED, -1
    return PixelClass.UNDETERMINED, -1


def _row_job(f, g, row, ys, xs, log_bail):
    zs = xs + 1j * ys[row]
    logs, overflow = _iterate_row(f, zs, g.max_iter + g.confirm_steps, log_bail)
    cls = np.zeros(len(xs), dtype=np.int8)
    steps = np.full(len(xs), -1, dtype=np.int32)
    kept = {}
    for i in range(len(xs)):
        c, s = _classify_orbit(logs[i], overflow[i], g.max_iter, g.confirm_steps, log_bail)
        cls[i], steps[i] = c, s
        if c == PixelClass.ESCAPING:
            kept[i] = logs[i][~np.isnan(logs[i])].copy()
    return cls, steps, kept


def classify_grid(f, g, pool=None):
    """Classify every pixel centre of ``g`` under iteration of ``f``.

    Rows are the unit of work, so results do not depend on ``pool``.
    """
    log_bail = math.log(g.bailout)
    xs, ys = g.xs(), g.ys()

    def job(row):
        return _row_job(f, g, row, ys, xs, log_bail)

    rows = list(pool.map(job, range(g.ny))) if pool is not None else [job(r) for r in range(g.ny)]
    classes = np.stack([r[0] for r in rows])
    steps = np.stack([r[1] for r in rows])
    orbit_logs = {}
    for j, (_, _, kept) in enumerate(rows):
        for i, v in kept.items():
            orbit_logs[j * g.nx + i] = v
    shape = (g.ny, g.nx)
    return EscapeGrid(g, f.digest(), classes, steps, np.zeros(shape, bool), np.zeros(shape, bool),
                      orbit_logs, {"grid": g.to_dict(), "function_digest": f.digest()})


def iterated_max_ladder(f, log_r0, n_max):
    """[log r0, log M(r0), log M(M(r0)), ...] up to n_max compositions.

    M(r, f^n) <= M^n(r) so the ladder is an upper bound for the maximum
    modulus of the iterates.  Stops early with LadderOverflow when a value
    cannot be represented.
    """
    out = [float(log_r0)]
    for _ in range(n_max):
        try:
            v = log_max_modulus(f, out[-1])
        except (OverflowDomain, NonConvergentProduct):
            v = math.inf
        if not math.isfinite(v):
            warnings.warn(f"M-ladder left the representable range after {len(out) - 1} steps",
                          LadderOverflow, stacklevel=2)
            break
        out.append(float(v))
    return out


def _check_grid(f, grid):
    if f.digest() != grid.function_digest:
        raise ValidationError("grid was classified for a different function")


def _passes(orbit, ladder, offset, start):
    """log|f^{n+offset}| > ladder[n] for all comparable n >= start (at least one)."""
    m = min(len(ladder), len(orbit) - offset)
    if m <= start:
        return False
    return bool(np.all(orbit[start + offset:m + offset] > np.asarray(ladder[start:m])))


def classify_fast(f, grid, logR, L_max):
    """Mark pixels with |f^{n+L}(z)| > M^n(R) on the recorded orbit for some
    1 <= L <= L_max; returns the updated fast mask."""
    _check_grid(f, grid)
    if L_max < 1:
        raise ValidationError("L_max must be at least 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LadderOverflow)
        ladder = iterated_max_ladder(f, logR, grid.spec.max_iter)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    mask = np.zeros(grid.classes.shape, bool)
    for flat, orbit in grid.orbit_logs.items():
        if any(_passes(orbit, ladder, L, 0) for L in range(1, L_max + 1)):
            mask.flat[flat] = True
    mask &= grid.escaping
    grid.fast_mask = mask
    grid.bd_mask &= mask
    grid.meta["fast"] = {"logR": float(logR), "L_max": int(L_max), "ladder": ladder,
                         "ladder_truncated": bool(caught)}
    return mask


def classify_bd(f, grid, D, include_n0=False):
    """Mark pixels whose recorded orbit stays outside the disc B(0, M^n(|c|+r)).

    The disc contains the filled image of f^n(D), so marked pixels are a subset
    of B_D(f) on the recorded range.  The result is intersected with the fast
    mask so the inclusion chain holds even for incompatible R and D.
    """
    _check_grid(f, grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LadderOverflow)
        ladder = iterated_max_ladder(f, math.log(D.bounding_radius), grid.spec.max_iter)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    start = 0 if include_n0 else 1
    mask = np.zeros(grid.classes.shape, bool)
    for flat, orbit in grid.orbit_logs.items():
        if _passes(orbit, ladder, 0, start):
            mask.flat[flat] = True
    mask &= grid.fast_mask
    grid.bd_mask = mask
    grid.meta["bd"] = {"disc": {"center": [complex(D.center).real, complex(D.center).imag],
                                "radius": D.radius},
                       "include_n0": include_n0, "ladder": ladder,
                       "ladder_truncated": bool(caught)}
    return mask


def julia_boundary(grid, side="escaping"):
    """Pixels where the Escaping class meets another class across a 4-neighbour edge.

    ``side="escaping"`` marks only the escaping side (a one-pixel-wide curve);
    ``side="both"`` marks both pixels of every such edge.
    """
    if side not in ("escaping", "both"):
        raise ValidationError("side must be 'escaping' or 'both'")
    esc = grid.escaping if isinstance(grid, EscapeGrid) else np.asarray(grid, bool)
    diff_h = esc[:, 1:] != esc[:, :-1]
    diff_v = esc[1:, :] != esc[:-1, :]
    touched = np.zeros(esc.shape, bool)
    touched[:, 1:] |= diff_h
    touched[:, :-1] |= diff_h
    touched[1:, :] |= diff_v
    touched[:-1, :] |= diff_v
    if side == "both":
        return touched
    return touched & esc
