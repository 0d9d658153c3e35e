"""Maximum/minimum modulus sampling, radial profiles and growth diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import (AtZero, InsufficientGrowth, MissingPairs, NonConvergentProduct,
                     OverflowDomain, ValidationError)
from .functions import LOG_SATURATE, Kind, log_abs_array, log_abs_at

ANGLE_TOL = 1e-6
AT_ZERO_REL = 1e-12
PERTURB_REL = 1e-6
PAIR_REL = 1e-5


class Method(str, Enum):
    ANGULAR = "AngularSampled"
    POSITIVE = "PositiveAxisShortcut"
    NEGATIVE = "NegativeAxisShortcut"
    LOG_DOMAIN = "LogDomain"


@dataclass(frozen=True)
class MaxModulus:
    logM: float
    arg_max: float
    method: Method


@dataclass(frozen=True)
class MinModulus:
    logm: float
    arg_min: float
    method: Method


def _sample(f, r, thetas):
    vals = log_abs_array(f, r * np.exp(1j * np.asarray(thetas)))
    if not np.all(np.isfinite(vals) | (vals == -np.inf)):
        raise OverflowDomain(f"direct sampling failed on |z| = {r:g}")
    return vals


def _refine(f, r, theta, half_width, sign):
    """Ternary search for an extremum of sign*log|f| in [theta-h, theta+h]."""
    lo, hi = theta - half_width, theta + half_width
    while hi - lo > ANGLE_TOL:
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        va, vb = sign * _sample(f, r, [a, b])
        if va < vb:
            lo = a
        else:
            hi = b
    mid = 0.5 * (lo + hi)
    return mid, float(_sample(f, r, [mid])[0])


def _angular(f, r, k, sign, widen=1.0):
    thetas = 2 * math.pi * np.arange(k) / k
    vals = _sample(f, r, thetas)
    j = int(np.argmax(sign * vals))
    best_t, best_v = float(thetas[j]), float(vals[j])
    t, v = _refine(f, r, best_t, widen * 2 * math.pi / k, sign)
    if sign * v > sign * best_v:
        best_t, best_v = t, v
    return best_v, math.remainder(best_t, 2 * math.pi)


def _check_at_zero(f, r):
    rn = f.nearest_zero_radius(r)
    if rn is not None and abs(r - rn) <= AT_ZERO_REL * rn:
        raise AtZero(r, rn)


def max_modulus(f, r, k=64, shortcut=True):
    if k < 16:
        raise ValidationError("max_modulus needs k >= 16")
    if shortcut and f.nonnegative_coefficients:
        return MaxModulus(float(_sample(f, r, [0.0])[0]), 0.0, Method.POSITIVE)
    v, t = _angular(f, r, k, +1)
    return MaxModulus(v, t, Method.ANGULAR)


def min_modulus(f, r, k=256, shortcut=True):
    """Minimum of log|f| on |z| = r.

    Kinds whose zeros all lie on the negative axis take m(r) = |f(-r)|.
    Raises AtZero (carrying ``logm = -inf``) when r hits a zero radius.
    """
    if k < 64:
        raise ValidationError("min_modulus needs k >= 64")
    _check_at_zero(f, r)
    if shortcut and (f.zeros_on_negative_axis or f.kind is Kind.SCALED_EXP):
        return MinModulus(float(_sample(f, r, [math.pi])[0]), math.pi, Method.NEGATIVE)
    widen = 1.0
    rn = f.nearest_zero_radius(r)
    if rn is not None and 0.5 < r / rn < 2.0:
        widen = 4.0
    v, t = _angular(f, r, k, -1, widen)
    return MinModulus(v, t, Method.ANGULAR)


# log-radius versions used when r itself leaves the float range

def log_max_modulus(f, log_r):
    if f.nonnegative_coefficients:
        return log_abs_at(f, log_r, 0.0)
    if log_r > LOG_SATURATE:
        raise OverflowDomain(f"no log-domain maximum for {f.kind.value} at log r = {log_r:g}")
    return max_modulus(f, math.exp(log_r), k=256, shortcut=False).logM


def log_min_modulus(f, log_r):
    if f.zeros_on_negative_axis or f.kind is Kind.SCALED_EXP:
        if log_r < 700:
            _check_at_zero(f, math.exp(log_r))
        return log_abs_at(f, log_r, math.pi)
    if log_r > LOG_SATURATE:
        raise OverflowDomain(f"no log-domain minimum for {f.kind.value} at log r = {log_r:g}")
    return min_modulus(f, math.exp(log_r), shortcut=False).logm


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileEntry:
    r: float
    logM: float
    logm: float
    method: Method
    perturbed: bool = False


@dataclass(frozen=True)
class RadialProfile:
    entries: tuple
    angular_resolution: int

    def __post_init__(self):
        rs = [e.r for e in self.entries]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValidationError("profile radii must be strictly increasing")

    @property
    def r(self):
        return np.array([e.r for e in self.entries])

    @property
    def logM(self):
        return np.array([e.logM for e in self.entries])

    @property
    def logm(self):
        return np.array([e.logm for e in self.entries])

    @classmethod
    def from_arrays(cls, r, logM, logm=None, method=Method.LOG_DOMAIN):
        """Build a profile from sampled values (e.g. a synthetic growth law)."""
        if logm is None:
            logm = [-math.inf] * len(r)
        entries = tuple(ProfileEntry(float(a), float(b), float(c), Method(method))
                        for a, b, c in zip(r, logM, logm))
        return cls(entries, 0)

    def to_csv_rows(self):
        return [(e.r, e.logM, e.logm, e.method.value) for e in self.entries]


def radius_ladder(r_min, r_max, points_per_decade):
    """Geometric ladder on [r_min, r_max] with every doubled radius appended."""
    if not 0 < r_min < r_max:
        raise ValidationError("need 0 < r_min < r_max")
    if points_per_decade < 4:
        raise ValidationError("points_per_decade must be >= 4")
    steps = int(math.floor(points_per_decade * math.log10(r_max / r_min) + 1e-9))
    base = [r_min * 10 ** (j / points_per_decade) for j in range(steps + 1)]
    radii = sorted(set(base) | {2 * r for r in base})
    out = [radii[0]]
    for r in radii[1:]:
        if r > out[-1] * (1 + 1e-12):
            out.append(r)
    return out


def _profile_entry(f, r, k_max, k_min):
    perturbed = False
    for attempt in range(8):
        try:
            lo = min_modulus(f, r, k_min)
            break
        except AtZero:
            # zero radii can be denser than the perturbation at large r, so
            # keep stepping by an incommensurate fraction of it
            r = r * (1 + PERTURB_REL / (1 + attempt / math.pi))
            perturbed = True
    else:
        raise AtZero(r, f.nearest_zero_radius(r))
    try:
        hi = max_modulus(f, r, k_max)
        logM, method = hi.logM, hi.method
    except (OverflowDomain, NonConvergentProduct):
        logM, method = log_max_modulus(f, math.log(r)), Method.LOG_DOMAIN
    if logM > LOG_SATURATE:
        method = Method.LOG_DOMAIN
    return ProfileEntry(r, logM, min(lo.logm, logM), method, perturbed)


def build_profile(f, r_min, r_max, points_per_decade=8, k_max=64, k_min=256, pool=None):
    radii = radius_ladder(r_min, r_max, points_per_decade)
    if pool is None:
        entries = [_profile_entry(f, r, k_max, k_min) for r in radii]
    else:
        entries = list(pool.map(lambda r: _profile_entry(f, r, k_max, k_min), radii))
    return RadialProfile(tuple(entries), k_min)


# ---------------------------------------------------------------------------
# growth diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderEstimate:
    rho: float
    ci: float


def estimate_order(profile, tail_fraction=0.5):
    """Least-squares slope of log log M against log r over the top of the ladder."""
    if not 0 < tail_fraction <= 1:
        raise ValidationError("tail_fraction must lie in (0, 1]")
    n = len(profile.entries)
    tail = profile.entries[n - max(1, math.ceil(tail_fraction * n)):]
    pts = [(math.log(e.r), math.log(e.logM)) for e in tail if e.logM > 1]
    if len(pts) < 8:
        raise InsufficientGrowth(f"only {len(pts)} tail entries with log M > 1 (need 8)")
    x, y = np.array(pts).T
    xm = x - x.mean()
    slope = float((xm * (y - y.mean())).sum() / (xm ** 2).sum())
    resid = y - y.mean() - slope * xm
    se = math.sqrt(float((resid ** 2).sum()) / (len(x) - 2) / float((xm ** 2).sum()))
    return OrderEstimate(slope, 2 * se)


@dataclass(frozen=True)
class Condition15:
    holds: bool
    epsilon: float
    R: float
    first_violation_r: float | None


def check_condition_1_5(profile, epsilon, R):
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    floor = max(R, math.e ** math.e)
    for e in profile.entries:
        if e.r <= floor:
            continue
        lr = math.log(e.r)
        lhs = math.log(e.logM) if e.logM > 0 else -math.inf
        rhs = math.sqrt(lr) / math.log(lr) ** epsilon
        if not lhs < rhs:
            return Condition15(False, epsilon, R, e.r)
    return Condition15(True, epsilon, R, None)


def doubling_ratios(profile):
    """(r, log M(2r)/log M(r)) for every doubled pair present on the ladder."""
    r = profile.r
    logM = profile.logM
    out = []
    for i, ri in enumerate(r):
        j = int(np.searchsorted(r, 2 * ri))
        for jj in (j - 1, j):
            if 0 <= jj < len(r) and abs(r[jj] / (2 * ri) - 1) < PAIR_REL and logM[i] > 0:
                out.append((float(ri), float(logM[jj] / logM[i])))
                break
    return out


@dataclass(frozen=True)
class Condition16:
    holds: bool
    c_estimate: float
    dispersion: float


def check_condition_1_6(profile, decades=2.0):
    pairs = doubling_ratios(profile)
    if not pairs:
        raise MissingPairs("profile holds no (r, 2r) pairs")
    top = max(r for r, _ in pairs)
    window = [v for r, v in pairs if r >= top / 10 ** decades]
    c = float(np.mean(window))
    disp = float(max(abs(v - c) for v in window))
    return Condition16(disp < 0.02 * c, c, disp)


@dataclass
class GrowthReport:
    order_estimate: float
    order_ci_halfwidth: float
    ratio_c_samples: list
    cond_1_5: Condition15
    cond_1_6: Condition16 | None
    sampled_range: tuple = field(default=(None, None))

    def to_dict(self):
        d = asdict(self)
        d["ratio_c_samples"] = [{"r": r, "value": v} for r, v in self.ratio_c_samples]
        d["sampled_range"] = list(self.sampled_range)
        return d


def growth_report(profile, epsilon=0.5, R=math.e ** math.e, tail_fraction=0.5):
    order = estimate_order(profile, tail_fraction)
    try:
        c16 = check_condition_1_6(profile)
    except MissingPairs:
        c16 = None
    rs = profile.r
    return GrowthReport(order.rho, order.ci, doubling_ratios(profile),
                        check_condition_1_5(profile, epsilon, R), c16,
                        (float(rs[0]), float(rs[-1])))
