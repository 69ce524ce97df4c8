"""Special functions and adaptive quadrature used by the CF pipeline.

Hypergeometric functions are only supported for real arguments and the small
parameter families needed here; they are summed as power series with
compensated accumulation, switching to arbitrary-precision arithmetic when the
alternating series would cancel below double precision.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .errors import NumericFailure, ParameterError

MAX_TERMS = 10_000
GUARD_TERMS = 3
_EPS = np.finfo(float).eps
# beyond this many decimal digits of cancellation the series is abandoned
MAX_EXTRA_DIGITS = 2_000


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2_000
    tail_threshold: float = 1e-10

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.tail_threshold > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


# --------------------------------------------------------------------------
# hypergeometric series


def _check_denominators(bs):
    for b in bs:
        if b <= 0 and b == int(b):
            raise ParameterError(f"denominator parameter {b} is a nonpositive integer")


def _series_double(num, den, z, rel_tol):
    """Sum pFq in double precision. Returns (value, max |term|, terms used)."""
    total, comp = 1.0, 0.0
    term = 1.0
    biggest = 1.0
    small_run = 0
    for k in range(MAX_TERMS):
        ratio = z / (k + 1)
        for a in num:
            ratio *= a + k
        for b in den:
            ratio /= b + k
        term *= ratio
        if term == 0.0:
            return total, biggest, k + 1
        # Kahan step
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        biggest = max(biggest, abs(term))
        if abs(term) <= rel_tol * abs(total) and abs(ratio) < 1:
            small_run += 1
            if small_run >= GUARD_TERMS:
                return total, biggest, k + 1
        else:
            small_run = 0
    raise NumericFailure(
        "hypergeometric series did not converge",
        partial_sum=total, terms=MAX_TERMS, num=num, den=den, z=z,
    )


def _series_mp(num, den, z, digits, rel_tol, max_terms):
    with mpmath.workdps(digits):
        zz = mpmath.mpf(z)
        num = [mpmath.mpf(a) for a in num]
        den = [mpmath.mpf(b) for b in den]
        total = mpmath.mpf(1)
        term = mpmath.mpf(1)
        small_run = 0
        for k in range(max_terms):
            ratio = zz / (k + 1)
            for a in num:
                ratio *= a + k
            for b in den:
                ratio /= b + k
            term *= ratio
            total += term
            if term == 0:
                return float(total)
            if abs(term) <= rel_tol * abs(total) and abs(ratio) < 1:
                small_run += 1
                if small_run >= GUARD_TERMS:
                    return float(total)
            else:
                small_run = 0
    raise NumericFailure(
        "extended-precision hypergeometric series did not converge",
        partial_sum=float(total), terms=max_terms, digits=digits, z=z,
    )


def hyp_series(num, den, z, rel_tol=1e-15):
    """Generic real pFq power series with cancellation control.

    The double-precision pass measures how large the terms get relative to
    the final sum; if that loss would leave fewer than ~12 correct digits the
    series is re-summed with enough extra working digits to absorb it.
    """
    num, den = tuple(float(a) for a in num), tuple(float(b) for b in den)
    _check_denominators(den)
    z = float(z)
    if z == 0.0:
        return 1.0
    try:
        value, biggest, _ = _series_double(num, den, z, rel_tol)
    except NumericFailure:
        value, biggest = 0.0, math.inf
    if value != 0.0 and math.isfinite(biggest) and biggest / abs(value) * _EPS < 1e-12:
        return value
    # the double pass cannot be trusted to size the cancellation (its sum may
    # be pure roundoff), so bound the largest term independently and iterate
    # until the working precision covers log10(max term / |sum|)
    top = _largest_term_log10(num, den, z)
    max_terms = max(MAX_TERMS, int(4 * abs(z) ** (1.0 / max(1, len(den) + 1 - len(num)))) + 100)
    extra = int(top) + 1
    for _ in range(4):
        if extra > MAX_EXTRA_DIGITS:
            break
        value = _series_mp(num, den, z, 20 + extra, 1e-17, max_terms)
        if value == 0.0:
            need = extra + 20
        else:
            need = int(top - math.log10(abs(value))) + 1
        if need <= extra:
            return value
        extra = need
    raise NumericFailure(
        "series cancellation beyond supported precision",
        digits_lost=extra, num=num, den=den, z=z,
    )


def _largest_term_log10(num, den, z):
    """log10 of the largest series term (walks the term ratios in log space)."""
    log_term, best = 0.0, 0.0
    lz = math.log(abs(z))
    for k in range(10 * MAX_TERMS):
        step = lz - math.log(k + 1)
        step += sum(math.log(abs(a + k)) if a + k != 0 else -math.inf for a in num)
        step -= sum(math.log(abs(b + k)) for b in den)
        if step == -math.inf:
            break
        log_term += step
        best = max(best, log_term)
        if step < 0 and log_term < best - 50:
            break
    return best / math.log(10) + 1


def hyp1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric 1F1(a; b; z) for real arguments.

    For z < 0 Kummer's transformation turns the alternating series into a
    positive one when b - a > 0 and b > 0; for large |z| the algebraic
    asymptotic expansion is used when it converges to double precision.
    """
    _check_denominators([b])
    z = float(z)
    if z == 0.0 or a == 0.0:
        return 1.0
    if a == b:
        return math.exp(z)
    if z > 0 or abs(z) <= 1.0:
        return hyp_series((a,), (b,), z)
    if abs(z) > 30.0:
        value = _hyp1f1_asymptotic_negative(a, b, z)
        if value is not None:
            return value
    if b - a > 0 and b > 0:
        return _kummer_positive(a, b, z)
    return hyp_series((a,), (b,), z)


def _kummer_positive(a, b, z):
    """exp(z) * 1F1(b - a; b; -z) for z < 0 summed in log space."""
    x = -z
    c = b - a
    # terms t_k = (c)_k / (b)_k x^k / k!, positive; sum around the peak
    k_peak = max(0.0, x + c - b)
    width = 40.0 * math.sqrt(x + 1.0) + 60.0
    k_hi = int(k_peak + width)
    k = np.arange(0, k_hi + 1, dtype=float)
    log_t = (
        special.gammaln(c + k) - special.gammaln(c)
        + special.gammaln(b) - special.gammaln(b + k)
        + k * math.log(x) - special.gammaln(k + 1.0)
    )
    if log_t[-1] > log_t.max() - 40.0:
        raise NumericFailure("Kummer series window too short", z=z, terms=k_hi)
    m = log_t.max()
    return float(math.exp(m - x) * math.fsum(np.exp(log_t - m)))


def _hyp1f1_asymptotic_negative(a, b, z):
    """Gamma(b)/Gamma(b-a) |z|^-a 2F0(a, a-b+1;; 1/|z|) for z -> -inf."""
    x = -z
    inv_gamma = special.rgamma(b - a)
    if inv_gamma == 0.0:
        return None
    total, comp, term = 1.0, 0.0, 1.0
    prev = math.inf
    for n in range(200):
        term *= (a + n) * (a - b + 1 + n) / ((n + 1) * x)
        if term == 0.0:
            break
        if abs(term) > prev:
            return None  # diverging before reaching double precision
        prev = abs(term)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-17 * abs(total):
            break
    else:
        return None
    # the neglected exponentially small part is ~exp(-x) x^(a-b)
    main = special.gamma(b) * inv_gamma * x ** (-a) * total
    if main == 0.0 or abs(math.exp(-x) * x ** (a - b) * special.gamma(b) * special.rgamma(a)) > 1e-16 * abs(main):
        return None
    return float(main)


def hyp1f2(a: float, b1: float, b2: float, z: float) -> float:
    """1F2(a; b1, b2; z) by series (extended precision when it cancels)."""
    _check_denominators([b1, b2])
    return hyp_series((a,), (b1, b2), z)


def hyp2f2(a1: float, a2: float, b1: float, b2: float, z: float) -> float:
    """2F2(a1, a2; b1, b2; z).

    Numerator/denominator pairs that coincide cancel exactly, in which case the
    function is delegated to :func:`hyp1f1` (or ``exp``), which stays accurate
    for arbitrarily large negative ``z``.
    """
    _check_denominators([b1, b2])
    if z == 0:
        return 1.0
    num, den = [a1, a2], [b1, b2]
    for a in list(num):
        if a in den:
            num.remove(a)
            den.remove(a)
    if len(num) == 1:
        return hyp1f1(num[0], den[0], z)
    if not num:
        return math.exp(z)
    if z < -30.0:
        value = _hyp2f2_asymptotic_negative(a1, a2, b1, b2, z)
        if value is not None:
            return value
    return hyp_series(num, den, z)


def hyp2f2_minus_one(a1: float, a2: float, b1: float, b2: float, z: float) -> float:
    """2F2(a1, a2; b1, b2; z) - 1 without cancellation for small |z|.

    Near z = 0 the series is summed from its first nonconstant term, so the
    result keeps full relative accuracy even when it is far below 1 ulp of 1.
    """
    _check_denominators([b1, b2])
    z = float(z)
    if abs(z) > 1.0:
        return hyp2f2(a1, a2, b1, b2, z) - 1.0
    term = a1 * a2 / (b1 * b2) * z
    total, comp = 0.0, 0.0
    for n in range(1, MAX_TERMS):
        y = term - comp  # Kahan summation
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= 1e-17 * abs(total) or term == 0.0:
            return total
        term *= (a1 + n) * (a2 + n) / ((b1 + n) * (b2 + n)) * z / (n + 1)
    raise NumericFailure("2F2 - 1 series did not converge", z=z)


def _algebraic_series(a, others, bs, x):
    """Sum_n (a)_n prod(1-b+a)_n / (n! prod(1-o+a)_n) x^-n, or None if it
    diverges before reaching double precision."""
    total, comp, term = 1.0, 0.0, 1.0
    prev = math.inf
    for n in range(400):
        ratio = (a + n) / ((n + 1) * x)
        for b in bs:
            ratio *= 1.0 - b + a + n
        for o in others:
            ratio /= 1.0 - o + a + n
        term *= ratio
        if term == 0.0:
            return total
        if abs(term) > prev:
            return None
        prev = abs(term)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-17 * abs(total):
            return total
    return None


def _hyp2f2_asymptotic_negative(a1, a2, b1, b2, z):
    """Algebraic large-|z| expansion of 2F2 on the negative axis.

    Sum over i of Gamma(b1)Gamma(b2)Gamma(a_j - a_i) / (Gamma(a_j)
    Gamma(b1 - a_i)Gamma(b2 - a_i)) |z|^-a_i * 3F1-type tail; the
    exponentially small companion term is checked to be negligible.
    """
    if float(a1 - a2).is_integer():
        return None
    x = -z
    total = 0.0
    for ai, aj in ((a1, a2), (a2, a1)):
        coef = (
            special.gamma(b1) * special.gamma(b2) * special.gamma(aj - ai)
            * special.rgamma(aj) * special.rgamma(b1 - ai) * special.rgamma(b2 - ai)
        )
        if coef == 0.0:
            continue
        tail = _algebraic_series(ai, (aj,), (b1, b2), x)
        if tail is None or not math.isfinite(coef):
            return None
        total += coef * x ** (-ai) * tail
    # exponential companion ~ exp(-x) x^(a1+a2-b1-b2)
    expo = math.exp(-x) * x ** (a1 + a2 - b1 - b2) * abs(
        special.gamma(b1) * special.gamma(b2) * special.rgamma(a1) * special.rgamma(a2)
    )
    if total == 0.0 or expo > 1e-16 * abs(total):
        return None
    return float(total)


def hyp1f1_power_tail(alpha, z):
    """1F1(-1/alpha; 1 - 1/alpha; -z) - 1 for arrays z >= 0.

    Uses 1F1(-1/a; 1-1/a; -z) = exp(-z) + z^(1/a) * lower_gamma(1 - 1/a, z),
    which is free of cancellation for every z and vectorizes.
    """
    z = np.asarray(z, dtype=float)
    b = 1.0 - 1.0 / alpha
    out = np.expm1(-z) + np.power(z, 1.0 / alpha) * special.gammainc(b, z) * special.gamma(b)
    return out


def erf(x):
    """Error function (scipy's Cody rational approximations, ~1 ulp)."""
    return special.erf(x)


# --------------------------------------------------------------------------
# quadrature

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# 15 Kronrod abscissae on [-1, 1] and the matching weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]


def gauss_kronrod(f, lo, hi):
    """15-point Kronrod estimate on each [lo_i, hi_i] with |K - G| error.

    ``f`` must accept and return numpy arrays; ``lo``/``hi`` are 1-D arrays.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (fx @ _KW)
    gauss = half * (fx @ _GW)
    return kron, np.abs(kron - gauss)


def integrate_finite(f, a: float, b: float, cfg: QuadratureConfig = DEFAULT_QUAD,
                     points=()):
    """Globally adaptive Gauss-Kronrod integral of vectorized ``f`` over [a, b].

    ``points`` are interior breakpoints (kinks, known peaks) that seed the
    initial partition.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = np.unique(np.concatenate([[a], [p for p in points if a < p < b], [b]]))
    lo, hi = edges[:-1], edges[1:]
    vals, errs = gauss_kronrod(f, lo, hi)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(errs))):
        raise NumericFailure("non-finite integrand", a=a, b=b)
    heap = [(-e, l, h, v) for l, h, v, e in zip(lo, hi, vals, errs)]
    heapq.heapify(heap)
    total = math.fsum(vals)
    err = float(np.sum(errs))
    splits = 0
    while err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if splits >= cfg.max_subdivisions:
            raise NumericFailure(
                "adaptive quadrature exceeded subdivision cap",
                estimate=total, error=err, subdivisions=splits,
            )
        # split every interval whose error exceeds an even share of the budget
        budget = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        share = budget / max(len(heap), 1)
        pick = []
        while heap and (not pick or -heap[0][0] > share) and len(pick) < 64:
            pick.append(heapq.heappop(heap))
        keep = []
        new_lo, new_hi = [], []
        for ne, l, h, v in pick:
            m = 0.5 * (l + h)
            if not (l < m < h) or (h - l) <= 64 * _EPS * max(abs(l), abs(h)):
                keep.append((ne, l, h, v))  # cannot refine further
                continue
            new_lo += [l, m]
            new_hi += [m, h]
        if not new_lo:
            for item in keep:
                heapq.heappush(heap, item)
            break
        v2, e2 = gauss_kronrod(f, np.array(new_lo), np.array(new_hi))
        if not (np.all(np.isfinite(v2)) and np.all(np.isfinite(e2))):
            raise NumericFailure("non-finite integrand", a=a, b=b)
        splits += len(new_lo) // 2
        for item in keep:
            heapq.heappush(heap, item)
        for l, h, v, e in zip(new_lo, new_hi, v2, e2):
            heapq.heappush(heap, (-e, l, h, v))
        total = math.fsum(item[3] for item in heap)
        err = math.fsum(-item[0] for item in heap)
    return sign * total


def integrate_semi_infinite(f, a: float, cfg: QuadratureConfig = DEFAULT_QUAD,
                            panel: float = 1.0, max_panels: int = 100_000,
                            growth: float = 1.0):
    """Integral of ``f`` over [a, inf) by accumulating adaptive panels.

    Panels start with width ``panel`` (put it at a half period for sine-type
    integrands) and are multiplied by ``growth`` each step. The sum is
    declared converged once panel contributions are decreasing and
    ``GUARD_TERMS`` consecutive panels fall below ``tail_threshold`` relative
    to the running total (or below ``abs_tol``).
    """
    if not panel > 0:
        raise ValueError("panel width must be positive")
    total = 0.0
    parts = []
    lo, width = a, panel
    prev = math.inf
    decreasing = False
    quiet = 0
    for _ in range(max_panels):
        hi = lo + width
        piece = integrate_finite(f, lo, hi, cfg)
        parts.append(piece)
        total = math.fsum(parts)
        size = abs(piece)
        decreasing = decreasing or size < prev
        if decreasing and size <= max(cfg.tail_threshold * abs(total), cfg.abs_tol):
            quiet += 1
            if quiet >= GUARD_TERMS:
                return total
        else:
            quiet = 0
        prev = size
        lo, width = hi, width * growth
    raise NumericFailure(
        "semi-infinite integrand is not decaying", estimate=total, panels=max_panels, upto=lo,
    )
