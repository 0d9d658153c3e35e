"""Catalog of small-growth entire functions and their evaluation.

Every kind is evaluated through ``log f`` (a complex logarithm whose real part
is ``log|f|``), so moduli far beyond the float range stay usable.  Direct values
are obtained by exponentiating and saturate above ``1e300``.

Kinds
-----
FatouBaker        z + 1 + exp(-z)
ScaledExp         lam * exp(z)
QuarterCosh       (cos z^(1/4) + cosh z^(1/4)) / 2 = sum z^k / (4k)!
CanonicalProduct  c * prod (1 + z / n^(1/rho)),  0 < rho < 1/2
GeneralProduct    c * prod (1 + z / r_n),  r_n >= a n^q certified, q > 2
"""
from __future__ import annotations

import cmath
import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from enum import Enum

import mpmath
import numpy as np

from .errors import NearZero, NonConvergentProduct, OverflowDomain, ValidationError

LOG_SATURATE = math.log(1e300)
QUARTER_COSH_CROSSOVER = 100.0
CLOSED_FORM_TERMS = 2 ** 16
MP_LOG_RADIUS = 80.0
NEAR_ZERO_REL = 1e-9
MP_MAX_DPS = 20000
_BLOCK_ELEMENTS = 2 ** 21
_QC_SERIES = np.array([1.0 / math.factorial(4 * k) for k in range(16)])

_MP_LOCK = threading.Lock()


class Kind(str, Enum):
    FATOU_BAKER = "FatouBaker"
    SCALED_EXP = "ScaledExp"
    QUARTER_COSH = "QuarterCosh"
    CANONICAL_PRODUCT = "CanonicalProduct"
    GENERAL_PRODUCT = "GeneralProduct"


PRODUCT_KINDS = (Kind.CANONICAL_PRODUCT, Kind.GENERAL_PRODUCT)


@dataclass(frozen=True)
class ZeroRadiiRule:
    """Zero radii r_n = lead[n-1] for n <= len(lead), else a * n**q.

    The explicit prefix must respect the certified lower bound r_n >= a n^q,
    which is what the truncation tail bound relies on.
    """

    a: float
    q: float
    lead: tuple = ()

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValidationError("zero radii rule needs a > 0")
        if not self.q > 2:
            raise ValidationError("zero radii rule needs exponent q > 2")
        lead = tuple(float(x) for x in self.lead)
        object.__setattr__(self, "lead", lead)
        prefix = list(lead) + [self.a * (len(lead) + k) ** self.q for k in (1, 2)]
        for i, (lo, hi) in enumerate(zip(prefix, prefix[1:])):
            if not (0 < lo < hi):
                raise ValidationError(f"zero radii not strictly increasing at n={i + 1}")
        for n, r in enumerate(lead, start=1):
            if r < self.a * n ** self.q:
                raise ValidationError(f"r_{n} = {r} violates r_n >= a n^q")

    def radii(self, n):
        n = np.asarray(n, dtype=np.int64)
        out = self.a * n.astype(float) ** self.q
        if self.lead:
            sel = n <= len(self.lead)
            out[sel] = np.asarray(self.lead)[n[sel] - 1]
        return out

    def count_below(self, r):
        """Number of zero radii strictly below ``r``."""
        k = len(self.lead)
        if self.lead and r <= self.lead[-1]:
            return int(np.searchsorted(self.lead, r, side="left"))
        n = int(math.floor((r / self.a) ** (1.0 / self.q)))
        for _ in range(2):
            if n > k and self.a * n ** self.q >= r:
                n -= 1
            elif self.a * (n + 1) ** self.q < r:
                n += 1
        return max(n, k)

    def nearest(self, r):
        if (r / self.a) ** (1.0 / self.q) > 2.0 ** 52:
            return None
        idx = self.count_below(r)
        cands = [i for i in (idx, idx + 1) if i >= 1]
        radii = self.radii(np.array(cands))
        return float(radii[np.argmin(np.abs(radii - r))])

    def to_dict(self):
        return {"a": self.a, "q": self.q, "lead": list(self.lead)}


@dataclass(frozen=True)
class FunctionSpec:
    kind: Kind
    lam: float | None = None
    c: float = 1.0
    rho: float | None = None
    zero_rule: ZeroRadiiRule | None = None
    truncation_tol: float = 1e-6
    max_terms: int = 10 ** 7
    _rule: ZeroRadiiRule | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not self.truncation_tol > 0:
            raise ValidationError("truncation_tol must be > 0")
        if kind is Kind.SCALED_EXP:
            if self.lam is None or not self.lam > 0:
                raise ValidationError("ScaledExp needs lambda > 0")
        if kind in PRODUCT_KINDS and not (self.c > 0 and math.isfinite(self.c)):
            raise ValidationError("product kinds need c > 0")
        if kind is Kind.CANONICAL_PRODUCT:
            if self.rho is None or not 0 < self.rho < 0.5:
                raise ValidationError("CanonicalProduct needs rho in (0, 1/2)")
            object.__setattr__(self, "_rule", ZeroRadiiRule(1.0, 1.0 / self.rho))
        if kind is Kind.GENERAL_PRODUCT:
            if self.zero_rule is None:
                raise ValidationError("GeneralProduct needs a zero radii rule")
            object.__setattr__(self, "_rule", self.zero_rule)

    # -- constructors ---------------------------------------------------
    @classmethod
    def fatou_baker(cls, **kw):
        return cls(Kind.FATOU_BAKER, **kw)

    @classmethod
    def scaled_exp(cls, lam=1.0, **kw):
        return cls(Kind.SCALED_EXP, lam=lam, **kw)

    @classmethod
    def quarter_cosh(cls, **kw):
        return cls(Kind.QUARTER_COSH, **kw)

    @classmethod
    def canonical_product(cls, rho, c=1.0, **kw):
        return cls(Kind.CANONICAL_PRODUCT, rho=rho, c=c, **kw)

    @classmethod
    def general_product(cls, rule, c=1.0, **kw):
        return cls(Kind.GENERAL_PRODUCT, zero_rule=rule, c=c, **kw)

    # -- serialization --------------------------------------------------
    def to_dict(self):
        d = {"kind": self.kind.value}
        if self.kind is Kind.SCALED_EXP:
            d["lambda"] = self.lam
        if self.kind in PRODUCT_KINDS:
            d["c"] = self.c
        if self.kind is Kind.CANONICAL_PRODUCT:
            d["rho"] = self.rho
        if self.kind is Kind.GENERAL_PRODUCT:
            d["zero_radii"] = self.zero_rule.to_dict()
        d["truncation_tol"] = self.truncation_tol
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ValidationError("function spec must be an object with a 'kind'")
        try:
            kind = Kind(d["kind"])
        except ValueError:
            raise ValidationError(f"unknown function kind {d['kind']!r}") from None
        kw = {}
        if "truncation_tol" in d:
            kw["truncation_tol"] = float(d["truncation_tol"])
        if "max_terms" in d:
            kw["max_terms"] = int(d["max_terms"])
        if kind is Kind.SCALED_EXP:
            kw["lam"] = float(d.get("lambda", 1.0))
        if kind in PRODUCT_KINDS:
            kw["c"] = float(d.get("c", 1.0))
        if kind is Kind.CANONICAL_PRODUCT:
            if "rho" not in d:
                raise ValidationError("CanonicalProduct needs 'rho'")
            kw["rho"] = float(d["rho"])
        if kind is Kind.GENERAL_PRODUCT:
            zr = d.get("zero_radii")
            if not isinstance(zr, dict):
                raise ValidationError("GeneralProduct needs a 'zero_radii' object")
            kw["zero_rule"] = ZeroRadiiRule(float(zr["a"]), float(zr["q"]), tuple(zr.get("lead", ())))
        return cls(kind, **kw)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    # -- structural facts -----------------------------------------------
    @property
    def zeros_on_negative_axis(self):
        """All zeros lie on the negative real axis (so m(r) = |f(-r)|)."""
        return self.kind in PRODUCT_KINDS or self.kind is Kind.QUARTER_COSH

    @property
    def nonnegative_coefficients(self):
        """Taylor coefficients are all >= 0 (so M(r) = f(r))."""
        return self.kind is not Kind.FATOU_BAKER

    @property
    def even_exponent(self):
        """m with 1/rho = 2m for canonical products admitting a sine-product form."""
        if self.kind is not Kind.CANONICAL_PRODUCT:
            return None
        q = 1.0 / self.rho
        m = round(q / 2)
        return m if m >= 1 and abs(q - 2 * m) < 1e-12 else None

    def zero_radii(self, n):
        n = np.asarray(n)
        if self.kind is Kind.QUARTER_COSH:
            return 4 * math.pi ** 4 * (n - 0.5) ** 4
        if self._rule is not None:
            return self._rule.radii(n)
        return None

    @property
    def first_zero_radius(self):
        r = self.zero_radii(np.array([1]))
        return None if r is None else float(r[0])

    def zero_count(self, r):
        """Number of zeros in |z| < r, for kinds whose zeros are catalogued."""
        if self.kind is Kind.QUARTER_COSH:
            if r <= 0:
                return 0
            return int(math.ceil((r / (4 * math.pi ** 4)) ** 0.25 - 0.5))
        if self._rule is not None:
            return self._rule.count_below(r)
        if self.kind is Kind.SCALED_EXP:
            return 0
        return None

    def nearest_zero_radius(self, r):
        if self.kind is Kind.QUARTER_COSH:
            t = (r / (4 * math.pi ** 4)) ** 0.25 + 0.5
            if t > 2.0 ** 52:
                return None
            cands = [n for n in (math.floor(t), math.ceil(t)) if n >= 1]
            radii = self.zero_radii(np.array(cands, dtype=float))
            return float(radii[np.argmin(np.abs(radii - r))])
        if self._rule is not None:
            return self._rule.nearest(r)
        return None


@dataclass(frozen=True)
class EvalResult:
    value: complex
    log_abs: float
    trunc_bound: float
    branch_cut: bool = False


# ---------------------------------------------------------------------------
# vectorised log f
# ---------------------------------------------------------------------------

def _saturating_exp(logf):
    logf = np.atleast_1d(np.asarray(logf, dtype=complex))
    re, im = logf.real, logf.imag
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.where(re > LOG_SATURATE, np.inf, np.exp(np.minimum(re, LOG_SATURATE)))
        cos, sin = np.cos(im), np.sin(im)
        out_re = np.where(cos == 0, 0.0, mag * cos)
        out_im = np.where(sin == 0, 0.0, mag * sin)
    return out_re + 1j * out_im


def _logsin(w):
    """log sin(w), stable for large |Im w| (branch of the imaginary part arbitrary)."""
    w = np.asarray(w, dtype=complex)
    flip = w.imag < 0
    ww = np.where(flip, np.conj(w), w)
    with np.errstate(divide="ignore"):
        out = -1j * ww + np.log((np.exp(2j * ww) - 1) / 2j)
    return np.where(flip, np.conj(out), out)


def _cot(w):
    w = np.asarray(w, dtype=complex)
    flip = w.imag < 0
    ww = np.where(flip, np.conj(w), w)
    e = np.exp(2j * ww)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1j * (e + 1) / (e - 1)
    return np.where(flip, np.conj(out), out)


def _sine_factors(z, m):
    """Arguments a_j with 1 + z/n^(2m) = prod_j (1 - a_j^2/n^2)."""
    base = np.power(-np.asarray(z, dtype=complex), 1.0 / m)
    return [np.sqrt(base * cmath.exp(2j * math.pi * j / m)) for j in range(m)]


def _sine_product_log(f, z):
    total = np.full(np.shape(z), math.log(f.c), dtype=complex)
    for a in _sine_factors(z, f.even_exponent):
        total += _logsin(math.pi * a) - np.log(math.pi * a)
    return total


def _terms_needed(f, absz):
    """Smallest admissible truncation length per point (float array; inf if none)."""
    rule = f._rule
    q, a = rule.q, rule.a
    tol = f.truncation_tol
    with np.errstate(divide="ignore"):
        tail = (2 * absz / (a * (q - 1) * tol)) ** (1.0 / (q - 1))
        separation = (2 * absz / a) ** (1.0 / q)
    return np.ceil(np.maximum(np.maximum(tail, separation), max(len(rule.lead), 16)))


def _tail_bound(f, absz, n_terms):
    rule = f._rule
    q, a = rule.q, rule.a
    ratio = absz / (a * (n_terms + 1.0) ** q)
    return absz * n_terms ** (1.0 - q) / (a * (q - 1)) / (1.0 - ratio)


def _bucket(needed, max_terms):
    """Round truncation lengths up to powers of two so neighbouring points share N."""
    out = np.full(needed.shape, -1, dtype=np.int64)
    ok = np.isfinite(needed) & (needed <= max_terms)
    p2 = 2.0 ** np.ceil(np.log2(np.where(ok, needed, 1.0)))
    out[ok] = np.where(p2[ok] <= max_terms, p2[ok], needed[ok]).astype(np.int64)
    return out


def _partial_log_sum(rule, z, n_terms):
    """sum_{n<=N} log(1 + z/r_n) for a batch sharing N."""
    z = np.asarray(z, dtype=complex)
    real = bool(np.all(z.imag == 0))
    acc = np.zeros(z.shape, dtype=float if real else complex)
    flips = np.zeros(z.shape, dtype=np.int64)
    block = max(1, _BLOCK_ELEMENTS // max(1, z.size))
    x = z.real if real else z
    with np.errstate(divide="ignore"):
        for start in range(1, n_terms + 1, block):
            n = np.arange(start, min(start + block, n_terms + 1))
            w = x[:, None] / rule.radii(n)[None, :]
            if real:
                acc += np.where(w > -0.5, np.log1p(np.maximum(w, -0.5)), np.log(np.abs(1 + w))).sum(axis=1)
                flips += (w < -1).sum(axis=1)
            else:
                acc += np.log1p(w).sum(axis=1)
    if real:
        return acc + 1j * math.pi * (flips % 2)
    return acc


def _product_log(f, z, absz):
    logf = np.full(z.shape, complex(np.nan, np.nan))
    bound = np.full(z.shape, np.inf)
    needed = _terms_needed(f, absz)
    m = f.even_exponent
    closed = np.zeros(z.shape, dtype=bool)
    if m is not None:
        closed = ~(needed <= CLOSED_FORM_TERMS) & (absz > 0)
        if closed.any():
            logf[closed] = _sine_product_log(f, z[closed])
            bound[closed] = 0.0
    buckets = _bucket(needed, f.max_terms)
    buckets[closed] = -1
    for n_terms in np.unique(buckets):
        if n_terms < 0:
            continue
        sel = buckets == n_terms
        logf[sel] = math.log(f.c) + _partial_log_sum(f._rule, z[sel], int(n_terms))
        bound[sel] = _tail_bound(f, absz[sel], float(n_terms))
    return logf, bound


def _quarter_cosh_log(z, absz):
    logf = np.empty(z.shape, dtype=complex)
    small = absz < QUARTER_COSH_CROSSOVER
    if small.any():
        zs = z[small]
        acc = np.zeros(zs.shape, dtype=complex)
        for coef in _QC_SERIES[::-1]:
            acc = acc * zs + coef
        with np.errstate(divide="ignore"):
            logf[small] = np.log(acc)
    big = ~small
    if big.any():
        w = np.power(z[big], 0.25)
        ex = np.stack([w, -w, 1j * w, -1j * w])
        top = np.take_along_axis(ex, np.argmax(ex.real, axis=0)[None, :], axis=0)[0]
        with np.errstate(divide="ignore"):
            logf[big] = top + np.log(np.exp(ex - top).sum(axis=0)) - math.log(4.0)
    return logf


def _fatou_baker_log(z):
    logf = np.empty(z.shape, dtype=complex)
    direct = -z.real <= 600
    with np.errstate(divide="ignore"):
        zd = z[direct]
        logf[direct] = np.log(zd + 1 + np.exp(-zd))
        zf = z[~direct]
        logf[~direct] = -zf + np.log1p((zf + 1) * np.exp(zf))
    return logf


def log_eval(f, z):
    """Vectorised ``log f(z)`` and truncation bound on its real part.

    Points a product cannot reach within ``f.max_terms`` come back as NaN with
    an infinite bound; callers decide whether that is an error.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    absz = np.abs(z)
    zero = np.zeros(z.shape)
    if f.kind is Kind.SCALED_EXP:
        return math.log(f.lam) + z, zero
    if f.kind is Kind.FATOU_BAKER:
        return _fatou_baker_log(z), zero
    if f.kind is Kind.QUARTER_COSH:
        return _quarter_cosh_log(z, absz), zero
    return _product_log(f, z, absz)


def log_abs_array(f, z):
    logf, _ = log_eval(f, z)
    return logf.real


def _on_ray(r, theta):
    if theta == 0:
        return complex(r, 0.0)
    if theta == math.pi or theta == -math.pi:
        return complex(-r, 0.0)
    return cmath.rect(r, theta)


def evaluate(f, z):
    z = complex(z)
    logf, bound = log_eval(f, np.array([z]))
    lf = complex(logf[0])
    if math.isnan(lf.real):
        raise NonConvergentProduct(f"cannot reach tail bound {f.truncation_tol} at |z|={abs(z):g}")
    value = complex(_saturating_exp(lf)[0])
    branch = f.kind is Kind.QUARTER_COSH and z.imag == 0 and z.real < 0
    return EvalResult(value, lf.real, float(bound[0]), branch)


def _check_near_zero(f, z, rel):
    if not f.zeros_on_negative_axis or abs(z.imag) > rel * abs(z):
        return
    rn = f.nearest_zero_radius(abs(z))
    if rn is not None and abs(z + rn) <= rel * rn:
        raise NearZero(f"z={z} lies within relative {rel:g} of the zero -{rn:g}")


def evaluate_log_on_ray(f, r, theta, near_zero_rel=NEAR_ZERO_REL):
    """log|f(r e^{i theta})| as a sum of log-factors or closed-form logs."""
    z = _on_ray(r, theta)
    _check_near_zero(f, z, near_zero_rel)
    logf, _ = log_eval(f, np.array([z]))
    val = float(logf[0].real)
    if math.isnan(val):
        raise NonConvergentProduct(f"cannot reach tail bound {f.truncation_tol} at r={r:g}")
    if val == -math.inf:
        raise NearZero(f"f vanishes at {z}")
    return val


def _mp_log_abs(f, log_r, theta):
    if f.kind in PRODUCT_KINDS and f.even_exponent is None:
        raise NonConvergentProduct(f"no log-domain path for {f.kind.value} at log r = {log_r:g}")
    growth = 0.25 if f.kind is Kind.QUARTER_COSH else (f.rho if f.kind in PRODUCT_KINDS else 1.0)
    dps = int(growth * log_r / math.log(10)) + 40
    if dps > MP_MAX_DPS:
        raise OverflowDomain(f"log r = {log_r:g} needs {dps} digits")
    with _MP_LOCK, mpmath.workdps(dps):
        r = mpmath.exp(mpmath.mpf(log_r))
        if theta == 0:
            z = mpmath.mpc(r, 0)
        elif abs(theta) == math.pi:
            z = mpmath.mpc(-r, 0)
        else:
            z = r * mpmath.expj(mpmath.mpf(theta))
        if f.kind is Kind.SCALED_EXP:
            return float(mpmath.log(f.lam) + z.real)
        if f.kind is Kind.FATOU_BAKER:
            val = z + 1 + mpmath.exp(-z)
        elif f.kind is Kind.QUARTER_COSH:
            w = mpmath.root(z, 4)
            val = (mpmath.cos(w) + mpmath.cosh(w)) / 2
        else:
            m = f.even_exponent
            base = mpmath.power(-z, mpmath.mpf(1) / m)
            val = mpmath.mpf(f.c)
            for j in range(m):
                a = mpmath.sqrt(base * mpmath.expj(2 * mpmath.pi * j / m))
                val *= mpmath.sin(mpmath.pi * a) / (mpmath.pi * a)
        if val == 0:
            return -math.inf
        return float(mpmath.log(abs(val)))


def log_abs_at(f, log_r, theta=0.0):
    """log|f(e^{log_r} e^{i theta})| for radii given by their logarithm.

    Radii up to ``e^80`` go through the float path; beyond that an mpmath
    evaluation with enough digits to resolve the phase is used.  Results that
    exceed the float range come back as ``inf``.
    """
    if log_r <= MP_LOG_RADIUS:
        logf, _ = log_eval(f, np.array([_on_ray(math.exp(log_r), theta)]))
        val = float(logf[0].real)
        if math.isnan(val):
            raise NonConvergentProduct(f"cannot reach tail bound at log r = {log_r:g}")
        return val
    return _mp_log_abs(f, log_r, theta)


def log_derivative_on_ray(f, r):
    """r f'(r) / f(r) on the positive real axis."""
    r = float(r)
    if f.kind is Kind.SCALED_EXP:
        return r
    if f.kind is Kind.FATOU_BAKER:
        e = math.exp(-r)
        return r * (1 - e) / (r + 1 + e)
    if f.kind is Kind.QUARTER_COSH:
        if r < QUARTER_COSH_CROSSOVER:
            k = np.arange(len(_QC_SERIES))
            terms = _QC_SERIES * r ** k
            return float((k * terms).sum() / terms.sum())
        w = r ** 0.25
        e1, e2 = math.exp(-w), math.exp(-2 * w)
        return (w / 4) * (1 - e2 - 2 * math.sin(w) * e1) / (1 + e2 + 2 * math.cos(w) * e1)
    needed = _terms_needed(f, np.array([r]))
    m = f.even_exponent
    if m is not None and needed[0] > CLOSED_FORM_TERMS:
        total = 0j
        for a in _sine_factors(np.array([complex(r)]), m):
            total += (math.pi * a * _cot(math.pi * a) - 1)[0]
        return float(total.real / (2 * m))
    n_terms = int(_bucket(needed, f.max_terms)[0])
    if n_terms < 0:
        raise NonConvergentProduct(f"cannot reach tail bound {f.truncation_tol} at r={r:g}")
    acc = 0.0
    for start in range(1, n_terms + 1, _BLOCK_ELEMENTS):
        n = np.arange(start, min(start + _BLOCK_ELEMENTS, n_terms + 1))
        acc += float((r / (r + f._rule.radii(n))).sum())
    return acc


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

class ExitReason(str, Enum):
    BAILOUT = "Bailout"
    MAX_STEPS = "MaxSteps"
    OVERFLOW = "Overflow"


@dataclass
class Orbit:
    points: list
    log_abs: list
    exit_reason: ExitReason
    exit_step: int | None

    @property
    def escaped(self):
        return self.exit_reason is not ExitReason.MAX_STEPS


def iterate_orbit(f, z0, max_steps, bailout):
    """Iterate until |f^n(z0)| > bailout, overflow, or ``max_steps``.

    ``log_abs`` may hold one more entry than ``points`` when the last image is
    only known through its logarithm.
    """
    if not bailout > 0:
        raise ValidationError("bailout must be positive")
    log_bail = math.log(bailout)
    z = complex(z0)
    points, logs = [z], [math.log(abs(z)) if z else -math.inf]
    if logs[0] > log_bail:
        return Orbit(points, logs, ExitReason.BAILOUT, 0)
    for k in range(1, max_steps + 1):
        logf, _ = log_eval(f, np.array([z]))
        lf = complex(logf[0])
        if math.isnan(lf.real):
            return Orbit(points, logs, ExitReason.OVERFLOW, k)
        logs.append(lf.real)
        if lf.real > LOG_SATURATE:
            return Orbit(points, logs, ExitReason.OVERFLOW, k)
        z = complex(_saturating_exp(lf)[0])
        points.append(z)
        if lf.real > log_bail:
            return Orbit(points, logs, ExitReason.BAILOUT, k)
    return Orbit(points, logs, ExitReason.MAX_STEPS, None)
