"""Baker sequences, surrounding-curve checks, winding numbers and the log-derivative growth test.

Everything here works with natural logarithms of radii so that towers such as
R_{n+1} = M(R_n, f) stay representable long after R_n itself overflows.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (AtZero, MeshExhausted, NearZero, NoCandidate, NonConvergentProduct,
                     OverflowDomain, PreconditionError, SurroundFailure, ValidationError)
from .functions import log_derivative_on_ray, log_eval, evaluate_log_on_ray
from .modulus import build_profile, estimate_order, log_max_modulus, log_min_modulus

N_CANDIDATES = 64
N_REFINE = 16
WINDING_LOG_RADIUS_MAX = 60.0


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("disc radius must be positive")

    @property
    def bounding_radius(self):
        return abs(self.center) + self.radius


@dataclass
class GrowthModel:
    """log M(r) = a r^rho fitted on a profile; log m taken as cos(pi rho) log M."""

    a: float
    rho: float

    @classmethod
    def fit(cls, f, r_min=1e2, r_max=1e8):
        prof = build_profile(f, r_min, r_max, 8)
        est = estimate_order(prof)
        tail = prof.entries[len(prof.entries) // 2:]
        x = np.log([e.r for e in tail])
        y = np.log([e.logM for e in tail])
        return cls(float(math.exp(np.mean(y - est.rho * x))), est.rho)

    def log_max(self, log_r):
        x = math.log(self.a) + self.rho * log_r
        return math.exp(x) if x < 709.0 else math.inf

    def log_min(self, log_r):
        return math.cos(math.pi * self.rho) * self.log_max(log_r)


@dataclass
class BakerCertificate:
    logR: list
    logrho: list
    c_schedule: list
    margins: list
    logm_at_rho: list = field(default_factory=list)
    extrapolated_from: int | None = None
    verified: bool = False
    failed_step: int | None = None

    @property
    def steps(self):
        return len(self.margins)

    def to_dict(self):
        return {"log_base": "e", "logR": self.logR, "logrho": self.logrho,
                "c": self.c_schedule, "margins": self.margins,
                "verified": self.verified, "extrapolated_from": self.extrapolated_from}

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["logR"]), list(d["logrho"]), list(d["c"]), list(d["margins"]),
                   extrapolated_from=d.get("extrapolated_from"), verified=bool(d["verified"]))


class _LogModulus:
    """log M / log m at log radii, falling back to a fitted model when evaluation fails."""

    def __init__(self, f):
        self.f = f
        self._model = None
        self.used_model = False

    def model(self):
        if self._model is None:
            self._model = GrowthModel.fit(self.f)
        return self._model

    def log_max(self, log_r):
        try:
            return log_max_modulus(self.f, log_r), False
        except (NonConvergentProduct, OverflowDomain):
            return self.model().log_max(log_r), True

    def log_min(self, log_r):
        try:
            return log_min_modulus(self.f, log_r), False
        except AtZero:
            return -math.inf, False
        except (NonConvergentProduct, OverflowDomain):
            return self.model().log_min(log_r), True


def _candidates(lo, c, count):
    return [min(max(lo * c ** (j / (count - 1)), lo), c * lo) for j in range(count)]


def _best_candidate(lm, lo, c, pool):
    grid = _candidates(lo, c, N_CANDIDATES)
    evals = list(pool.map(lm.log_min, grid)) if pool else [lm.log_min(x) for x in grid]
    vals = [v for v, _ in evals]
    modelled = any(m for _, m in evals)
    finite = [i for i, v in enumerate(vals) if math.isfinite(v)]
    if not finite:
        return None, None, modelled
    j = max(finite, key=lambda i: vals[i])
    lo_j, hi_j = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    fine = [lo_j + (hi_j - lo_j) * i / (N_REFINE - 1) for i in range(N_REFINE)]
    fine = [min(max(x, lo), c * lo) for x in fine]
    fevals = list(pool.map(lm.log_min, fine)) if pool else [lm.log_min(x) for x in fine]
    best_x, best_v = grid[j], vals[j]
    for x, (v, m) in zip(fine, fevals):
        modelled = modelled or m
        if math.isfinite(v) and v > best_v:
            best_x, best_v = x, v
    return best_x, best_v, modelled


def build_baker_sequences(f, logR1, c_schedule, n_max, pool=None):
    """Construct R_n, rho_n for n = 1..n_max with R_{n+1} = M(R_n, f).

    Each companion radius rho_n is searched on a geometric grid in
    [log R_n, c(n) log R_n] (then refined once) to maximise log m(rho_n, f); the
    step's margin is log m(rho_n) - c(n+1) log R_{n+1}.  Raises NoCandidate
    with the partial, unverified certificate attached when no margin is
    positive.  When a value leaves the float range even under the fitted
    model, the certificate stops early with ``extrapolated_from`` pointing at
    the first step that is not backed by direct evaluation.
    """
    c_schedule = [float(c) for c in c_schedule]
    if len(c_schedule) < n_max + 1:
        raise ValidationError("c_schedule needs at least n_max + 1 entries")
    if any(not c > 1 for c in c_schedule):
        raise ValidationError("every c(n) must exceed 1")
    lm = _LogModulus(f)
    cert = BakerCertificate([float(logR1)], [], c_schedule, [])

    def mark_model(n):
        if cert.extrapolated_from is None:
            cert.extrapolated_from = n

    for n in range(1, n_max + 1):
        lr = cert.logR[-1]
        nxt, modelled = lm.log_max(lr)
        if modelled:
            mark_model(n)
        if not math.isfinite(nxt):
            mark_model(n)
            break
        if not nxt > lr:
            raise PreconditionError(
                f"R_{n + 1} = M(R_{n}) does not exceed R_{n} (log {nxt:.6g} <= {lr:.6g}); "
                "the sequence is not expanding from this R_1")
        cert.logR.append(nxt)
        x, v, modelled = _best_candidate(lm, lr, c_schedule[n - 1], pool)
        if modelled:
            mark_model(n)
        if x is None:
            mark_model(n)
            cert.logR.pop()
            break
        cert.logrho.append(x)
        cert.logm_at_rho.append(v)
        cert.margins.append(v - c_schedule[n] * nxt)
        if not cert.margins[-1] > 0:
            cert.failed_step = n
            cert.verified = False
            raise NoCandidate(n, cert)
    cert.verified = bool(cert.margins) and all(m > 0 for m in cert.margins)
    return cert


# ---------------------------------------------------------------------------
# winding numbers
# ---------------------------------------------------------------------------

def _log_shifted(f, log_r, thetas, w):
    r = math.exp(log_r)
    logf, _ = log_eval(f, r * np.exp(1j * thetas))
    if np.isnan(logf.real).any():
        raise NonConvergentProduct("image curve not evaluable")
    if w == 0:
        return logf
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return logf + np.log1p(-w * np.exp(-logf))


def _wrap(d):
    return (d + math.pi) % (2 * math.pi) - math.pi


def _insert(f, log_r, w, thetas, vals, mids):
    mvals = _log_shifted(f, log_r, mids, w)
    order = np.argsort(np.concatenate([thetas, mids]), kind="stable")
    return np.concatenate([thetas, mids])[order], np.concatenate([vals, mvals])[order]


def _refined_winding(f, log_r, w, thetas, vals, max_samples):
    log_scale = math.log(max(1.0, abs(w)))
    while True:
        if float(np.min(vals.real)) < math.log(1e-6) + log_scale:
            raise ValidationError(f"target {w} lies on the image curve")
        d = _wrap(np.diff(vals.imag))
        bad = np.abs(d) >= math.pi / 2
        if not bad.any():
            return thetas, vals, float(d.sum()) / (2 * math.pi)
        if len(thetas) + bad.sum() > max_samples:
            raise MeshExhausted(f"target {w}: more than {max_samples} samples needed")
        mids = 0.5 * (thetas[:-1][bad] + thetas[1:][bad])
        thetas, vals = _insert(f, log_r, w, thetas, vals, mids)


def check_winding(f, log_r, targets, max_samples=2 ** 20, start=256):
    """Winding numbers of theta -> f(r e^{i theta}) around each target.

    Arguments are tracked through log(f - w) so the curve may be astronomically
    large.  The angular mesh is bisected until every increment is below pi/2,
    then doubled uniformly until the count is stable (guards against aliasing
    when the curve turns many times between samples).
    """
    out = []
    for w in targets:
        w = complex(w)
        thetas = 2 * math.pi * np.arange(start + 1) / start
        vals = _log_shifted(f, log_r, thetas, w)
        thetas, vals, total = _refined_winding(f, log_r, w, thetas, vals, max_samples)
        while True:
            if 2 * len(thetas) > max_samples:
                raise MeshExhausted(f"target {w}: more than {max_samples} samples needed")
            mids = 0.5 * (thetas[:-1] + thetas[1:])
            thetas, vals = _insert(f, log_r, w, thetas, vals, mids)
            thetas, vals, again = _refined_winding(f, log_r, w, thetas, vals, max_samples)
            if round(again) == round(total):
                break
            total = again
        k = round(again)
        if abs(again - k) > 1e-3:
            raise MeshExhausted(f"target {w}: winding {again} is not integral")
        out.append(int(k))
    return out


# ---------------------------------------------------------------------------
# surrounding curves
# ---------------------------------------------------------------------------

@dataclass
class CurveFamily:
    circle_log_radii: list
    disc_D: Disc
    image_log_radii: list
    surrounds_image: list
    image_surrounds_next: list
    winding_method: list
    attestation: str = "user-asserted"

    @property
    def all_hold(self):
        return all(self.surrounds_image) and all(self.image_surrounds_next)

    @property
    def label(self):
        if self.all_hold:
            return "no unbounded Fatou components certified numerically on tested range"
        return "not certified"

    def to_dict(self):
        d = asdict(self)
        d["disc_D"] = {"center": [self.disc_D.center.real, self.disc_D.center.imag],
                       "radius": self.disc_D.radius}
        d["label"] = self.label
        return d


def verify_theorem4_curves(f, D, cert, strict=True, attestation="user-asserted"):
    """Check that the circles |z| = rho_n satisfy both surrounding conditions.

    (i)  f^n(D) lies in B(0, M^n(|c|+r)), which must sit inside |z| = rho_n;
    (ii) f maps |z| = rho_n outside |z| = rho_{n+1}: log m(rho_n) > log rho_{n+1},
         with the image winding around 0.  For the last step, rho_{n+1} is
         replaced by its admissible upper bound R_{n+1}^{c(n+1)}.
    """
    if not cert.verified:
        raise PreconditionError("verify_theorem4_curves needs a verified certificate")
    lm = _LogModulus(f)
    steps = cert.steps
    image, surround_i, surround_ii, wmethod = [], [], [], []
    level = math.log(D.bounding_radius)
    for n in range(1, steps + 1):
        level, _ = lm.log_max(level)
        image.append(level)
        surround_i.append(bool(level < cert.logrho[n - 1]))
        logm, _ = lm.log_min(cert.logrho[n - 1])
        if n < steps:
            nxt = cert.logrho[n]
        else:
            nxt = cert.c_schedule[n] * cert.logR[n]
        wind, how = _winding_about_zero(f, cert.logrho[n - 1])
        wmethod.append(how)
        surround_ii.append(bool(logm > nxt and wind >= 1))
    fam = CurveFamily(list(cert.logrho), D, image, surround_i, surround_ii, wmethod, attestation)
    if strict:
        for n, (a, b) in enumerate(zip(surround_i, surround_ii), start=1):
            if not a:
                raise SurroundFailure(n, 1, fam)
            if not b:
                raise SurroundFailure(n, 2, fam)
    return fam


def _winding_about_zero(f, log_r):
    if log_r <= WINDING_LOG_RADIUS_MAX:
        try:
            return check_winding(f, log_r, [0.0])[0], "argument"
        except (MeshExhausted, NonConvergentProduct):
            pass
    count = f.zero_count(math.exp(min(log_r, 700.0)))
    if count is None:
        return 0, "unavailable"
    return count, "zero-count"


# ---------------------------------------------------------------------------
# log-derivative ratio on the negative axis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition61:
    holds_on_grid: bool
    min_ratio: float
    ratios: tuple


def check_condition_6_1(f, r_grid, C, near_zero_rel=1e-9):
    """min over the grid of (r f'(r)/f(r)) / (C log f(r) / log r)."""
    if not C > 1:
        raise ValidationError("C must exceed 1")
    first = f.first_zero_radius
    ratios = []
    for r in r_grid:
        if first is not None and r <= first * (1 + near_zero_rel):
            raise NearZero(f"r = {r} does not exceed the first zero radius {first}")
        lhs = log_derivative_on_ray(f, r)
        rhs = C * evaluate_log_on_ray(f, r, 0.0, near_zero_rel) / math.log(r)
        ratios.append(lhs / rhs if rhs > 0 else math.inf)
    mn = min(ratios)
    return Condition61(bool(mn >= 1), float(mn), tuple(ratios))
