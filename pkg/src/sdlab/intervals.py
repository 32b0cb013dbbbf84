"""Short- and long-interval statistics: square-full enumeration, sums-of-two-
squares window counts, Cesaro means of the divisor distribution F_n(t), and
comparisons against the arcsine/beta limit laws.

The window engine never factors individual integers.  Divisor statistics come
from looping d <= sqrt(hi) over multiples (small divisors determine F_n(t) on
both halves of [0,1] through the d <-> n/d pairing), square-full members come
from the a^2 b^3 parametrization with b squarefree, and the two-squares
indicator comes from a segmented parity sieve over primes p = 3 (mod 4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import isqrt

import numpy as np

from . import specfun
from .arith import FactorSieve, divisor_le_threshold, _THRESHOLD_GUARD
from .errors import CapacityError, DomainError, EmptyIntervalError

__all__ = [
    "DEFAULT_T_GRID",
    "IntervalSpec",
    "LawReport",
    "enumerate_squarefull",
    "count_two_squares",
    "two_squares_count_and_masks",
    "ddt_mean",
    "weighted_fn_mean",
    "error_profile",
    "arcsine_law",
]

DEFAULT_T_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))

_WINDOW_GUARD = 10**15
_WIDTH_GUARD = 10**9
_CHUNK = 1 << 20


def arcsine_law(t: float) -> float:
    return (2.0 / math.pi) * math.asin(math.sqrt(t))


@dataclass(frozen=True)
class IntervalSpec:
    """Window (x, x + x^(1-1/kappa1) * y] with y = x^theta."""

    x: int
    theta: float
    kappa1: float

    def __post_init__(self):
        if self.x < 3:
            raise DomainError("x must be at least 3")
        if not 0.0 < self.theta <= 1.0:
            raise DomainError("theta must lie in (0, 1]")
        if self.kappa1 < 1.0:
            raise DomainError("kappa1 must be >= 1")
        if self.hi > 2 * self.x:
            raise DomainError("interval end exceeds 2x; shrink theta")

    @property
    def y(self) -> float:
        return float(self.x) ** self.theta

    @property
    def lo(self) -> int:
        return self.x

    @property
    def hi(self) -> int:
        return int(math.floor(self.x + self.x ** (1.0 - 1.0 / self.kappa1) * self.y))

    @property
    def y_prime(self) -> float:
        k = self.kappa1
        return k * (self.hi ** (1.0 / k) - self.x ** (1.0 / k))


@dataclass(frozen=True)
class LawReport:
    """Empirical divisor-distribution means against a limit-law prediction."""

    x: int
    y: float
    theta: float
    indicator: str
    t_grid: tuple[float, ...]
    empirical: tuple[float, ...]
    predicted: tuple[float, ...]
    sup_error: float
    count: int

    def records(self) -> list[dict]:
        rows = []
        for t, e, p in zip(self.t_grid, self.empirical, self.predicted):
            rows.append(
                {
                    "x": self.x,
                    "y": self.y,
                    "theta": self.theta,
                    "indicator": self.indicator,
                    "t": t,
                    "empirical": e,
                    "predicted": p,
                    "abs_error": abs(e - p),
                }
            )
        return rows


RECORD_FIELDS = ("x", "y", "theta", "indicator", "t", "empirical", "predicted", "abs_error")


# ----------------------------------------------------------------------------
# Square-full enumeration
# ----------------------------------------------------------------------------

def _squarefree_table(limit: int) -> np.ndarray:
    sf = np.ones(limit + 1, dtype=bool)
    sf[0] = False
    for p in range(2, isqrt(limit) + 1):
        sf[p * p :: p * p] = False
    return sf


def enumerate_squarefull(lo: int, hi: int) -> list[int]:
    """All square-full integers in (lo, hi], via n = a^2 b^3, b squarefree.

    The representation is unique, so no deduplication is needed.
    """
    if not 0 <= lo < hi:
        raise DomainError(f"need 0 <= lo < hi, got ({lo}, {hi}]")
    if hi > _WINDOW_GUARD:
        raise CapacityError(f"hi={hi} exceeds guard {_WINDOW_GUARD}")
    bmax = round(hi ** (1.0 / 3.0)) + 2
    sqfree = _squarefree_table(bmax)
    out: list[int] = []
    for b in range(1, bmax + 1):
        if not sqfree[b]:
            continue
        b3 = b * b * b
        if b3 > hi:
            break
        a = isqrt(lo // b3)
        while a * a * b3 <= lo:
            a += 1
        n = a * a * b3
        while n <= hi:
            out.append(n)
            a += 1
            n = a * a * b3
    out.sort()
    return out


# ----------------------------------------------------------------------------
# Two-squares segmented parity sieve
# ----------------------------------------------------------------------------

def _primes_upto(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0]


def two_squares_count_and_masks(lo: int, hi: int, chunk: int = _CHUNK):
    """Yield (chunk_lo, mask) for n in (chunk_lo, chunk_lo+len(mask)] where
    mask marks integers representable as a sum of two squares.

    Exactness: strip every prime p = 3 (mod 4) up to sqrt(hi) while tracking
    exponent parity, remove the powers of two, and test the odd cofactor mod 4
    (it is a product of p = 1 (mod 4) primes times at most one prime > sqrt(hi)).
    """
    if not 0 <= lo < hi:
        raise DomainError(f"need 0 <= lo < hi, got ({lo}, {hi}]")
    if hi > _WINDOW_GUARD:
        raise CapacityError(f"hi={hi} exceeds guard {_WINDOW_GUARD}")
    if hi - lo > _WIDTH_GUARD:
        raise CapacityError(f"window width {hi - lo} exceeds guard {_WIDTH_GUARD}")
    primes = _primes_upto(isqrt(hi))
    primes3 = [int(p) for p in primes[primes % 4 == 3]]
    for clo in range(lo, hi, chunk):
        chi_ = min(clo + chunk, hi)
        m = chi_ - clo
        residual = np.arange(clo + 1, chi_ + 1, dtype=np.int64)
        bad = np.zeros(m, dtype=bool)
        flip = np.zeros(m, dtype=bool)
        for p in primes3:
            start = (-(clo + 1)) % p
            if start >= m:
                continue
            pe = p
            while pe <= chi_:
                st = (-(clo + 1)) % pe
                if st < m:
                    view = residual[st::pe]
                    np.floor_divide(view, p, out=view)
                    flip[st::pe] ^= True
                pe *= p
            bad[start::p] |= flip[start::p]
            flip[start::p] = False
        pe = 2
        while pe <= chi_:
            st = (-(clo + 1)) % pe
            if st < m:
                view = residual[st::pe]
                np.floor_divide(view, 2, out=view)
            pe *= 2
        bad |= (residual & 3) == 3
        yield clo, ~bad


def count_two_squares(lo: int, hi: int) -> int:
    """Exact count of sums of two squares in (lo, hi]."""
    return int(sum(int(mask.sum()) for _, mask in two_squares_count_and_masks(lo, hi)))


# ----------------------------------------------------------------------------
# Window divisor-distribution engine
# ----------------------------------------------------------------------------

def _divisor_lt_strict(d: int, n: int, w: float) -> bool:
    """d < n**w with the complementary guard: exact complement of
    divisor_le_threshold applied to the cofactor n/d at t = 1-w."""
    if n == 1:
        return False
    return math.log(d) < w * math.log(n) - _THRESHOLD_GUARD


def _first_k_nonstrict(d: int, t: float, k_hint: int) -> int:
    """Smallest k >= 1 with divisor_le_threshold(d, d*k, t)."""
    k = max(1, k_hint)
    while k > 1 and divisor_le_threshold(d, d * (k - 1), t):
        k -= 1
    while not divisor_le_threshold(d, d * k, t):
        k += 1
    return k


def _first_k_strict(d: int, w: float, k_hint: int) -> int:
    k = max(1, k_hint)
    while k > 1 and _divisor_lt_strict(d, d * (k - 1), w):
        k -= 1
    while not _divisor_lt_strict(d, d * k, w):
        k += 1
    return k


def _run_starts(d: int, lo_ts: list[float], hi_ws: list[float], hi: int):
    """First multiple index k of d reaching each threshold (descending in the
    threshold index), or None when unreachable below hi."""
    kA = []
    for t in lo_ts:
        if d == 1:
            kA.append(1)
            continue
        if t <= 0.0:
            kA.append(None)
            continue
        hint = int(math.ceil(math.exp((math.log(d) - _THRESHOLD_GUARD) / t) / d)) if (
            (math.log(d) - _THRESHOLD_GUARD) / t < math.log(hi * 2.0)
        ) else None
        kA.append(_first_k_nonstrict(d, t, hint) if hint is not None else None)
    kB = []
    for w in hi_ws:
        if w <= 0.0:
            kB.append(None)
            continue
        hint_log = (math.log(d) + _THRESHOLD_GUARD) / w
        hint = (
            int(math.ceil(math.exp(hint_log) / d)) if hint_log < math.log(hi * 2.0) else None
        )
        kB.append(_first_k_strict(d, w, hint) if hint is not None else None)
    return kA, kB


def _mean_divisor_cdf(
    lo: int,
    hi: int,
    t_grid: tuple[float, ...],
    mask_chunks=None,
    chunk: int = _CHUNK,
):
    """(count, sums) with sums[i] = sum over selected n in (lo, hi] of F_n(t_i).

    mask_chunks: optional iterable of (chunk_lo, bool mask) aligned with the
    chunking used here; None selects every integer in the window.
    """
    ts = [float(t) for t in t_grid]
    if any(not 0.0 <= t <= 1.0 for t in ts):
        raise DomainError("t grid must lie within [0, 1]")
    lo_map = [i for i, t in enumerate(ts) if t <= 0.5]
    hi_map = [i for i, t in enumerate(ts) if t > 0.5]
    lo_ts = [ts[i] for i in lo_map]
    hi_ws = [1.0 - ts[i] for i in hi_map]
    # ascending thresholds give monotone run boundaries
    loc_sortA = sorted(range(len(lo_ts)), key=lambda i: lo_ts[i])
    loc_sortB = sorted(range(len(hi_ws)), key=lambda i: hi_ws[i])
    L = [lo_ts[i] for i in loc_sortA]
    W = [hi_ws[i] for i in loc_sortB]
    nL, nW = len(L), len(W)

    D = isqrt(hi)
    bounds = [_run_starts(d, L, W, hi) for d in range(1, D + 1)]

    count = 0
    sums = np.zeros(len(ts), dtype=np.float64)
    mask_iter = iter(mask_chunks) if mask_chunks is not None else None

    for clo in range(lo, hi, chunk):
        chigh = min(clo + chunk, hi)
        m = chigh - clo
        tau = np.zeros(m, dtype=np.int32)
        CA = np.zeros((m, nL), dtype=np.int16) if nL else None
        CB = np.zeros((m, nW), dtype=np.int16) if nW else None
        for d in range(1, D + 1):
            k_lo = clo // d + 1
            k_hi = chigh // d
            if k_lo > k_hi:
                continue
            kA, kB = bounds[d - 1]
            off = d * k_lo - clo - 1  # position of first multiple in chunk
            # tau: pairs d < sqrt(n) add 2; d = sqrt(n) adds 1
            k_pair = max(k_lo, d + 1)
            if k_pair <= k_hi:
                tau[off + (k_pair - k_lo) * d :: d] += 2
            if k_lo <= d <= k_hi:
                tau[off + (d - k_lo) * d] += 1
            prev = None  # run upper bound (exclusive); None = infinity
            for i in range(nL):
                ki = kA[i]
                if ki is None:
                    continue  # threshold unreachable below hi; run is empty
                a = max(ki, k_lo)
                b = min(prev if prev is not None else k_hi + 1, k_hi + 1)
                if a < b:
                    CA[off + (a - k_lo) * d : off + (b - 1 - k_lo) * d + 1 : d, i] += 1
                prev = ki
                if prev <= k_lo:
                    break
            prev = None
            for j in range(nW):
                kj = kB[j]
                if kj is None:
                    continue
                a = max(kj, k_lo)
                b = min(prev if prev is not None else k_hi + 1, k_hi + 1)
                if a < b:
                    CB[off + (a - k_lo) * d : off + (b - 1 - k_lo) * d + 1 : d, j] += 1
                prev = kj
                if prev <= k_lo:
                    break
        if mask_iter is not None:
            mlo, mask = next(mask_iter)
            if mlo != clo or mask.shape[0] != m:
                raise DomainError("mask chunks misaligned with window chunks")
        else:
            mask = None
        tau_f = tau.astype(np.float64)
        if mask is not None:
            sel = mask
            count += int(mask.sum())
            tau_sel = tau_f[sel]
        else:
            sel = slice(None)
            count += m
            tau_sel = tau_f
        if nL:
            ca = np.cumsum(CA[sel].astype(np.float64), axis=1)
            for loc, orig in enumerate(loc_sortA):
                sums[lo_map[orig]] += float((ca[:, loc] / tau_sel).sum())
        if nW:
            cb = np.cumsum(CB[sel].astype(np.float64), axis=1)
            for loc, orig in enumerate(loc_sortB):
                sums[hi_map[orig]] += float((1.0 - cb[:, loc] / tau_sel).sum())
    return count, sums


# ----------------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------------

def _beta_prediction(indicator: str, ts) -> tuple[float, ...]:
    if indicator == "all":
        return tuple(arcsine_law(t) for t in ts)
    if indicator == "squarefull":
        return tuple(specfun.reg_inc_beta(t, 2.0 / 3.0, 1.0 / 3.0) for t in ts)
    if indicator == "two_squares":
        return tuple(specfun.reg_inc_beta(t, 0.25, 0.25) for t in ts)
    raise DomainError(f"unknown indicator {indicator!r}")


def _make_report(indicator, x, y, theta, ts, count, sums) -> LawReport:
    empirical = tuple(float(s / count) for s in sums)
    predicted = _beta_prediction(indicator, ts)
    sup = max(abs(e - p) for e, p in zip(empirical, predicted))
    return LawReport(
        x=int(x),
        y=float(y),
        theta=float(theta),
        indicator=indicator,
        t_grid=tuple(float(t) for t in ts),
        empirical=empirical,
        predicted=predicted,
        sup_error=sup,
        count=count,
    )


def ddt_mean(x: int, t_grid=DEFAULT_T_GRID, sieve: FactorSieve | None = None) -> LawReport:
    """Plain Cesaro mean (1/x) sum_{n<=x} F_n(t) against the arcsine law."""
    if x < 2:
        raise DomainError("x must be at least 2")
    if sieve is not None and sieve.limit < x:
        raise DomainError("sieve limit below x")
    count, sums = _mean_divisor_cdf(0, x, tuple(t_grid))
    return _make_report("all", x, float(x), 1.0, tuple(t_grid), count, sums)


def _squarefull_window_mean(spec: IntervalSpec, ts):
    members = enumerate_squarefull(spec.lo, spec.hi)
    if not members:
        raise EmptyIntervalError(f"no square-full numbers in ({spec.lo}, {spec.hi}]")
    sums = np.zeros(len(ts))
    for n in members:
        logs = _divisor_logs_squarefull(n)
        logs.sort()
        ln_n = math.log(n)
        for i, t in enumerate(ts):
            sums[i] += (
                np.searchsorted(logs, t * ln_n + _THRESHOLD_GUARD, side="right")
                / logs.size
            )
    return len(members), sums


def _divisor_logs_squarefull(n: int) -> np.ndarray:
    exps = _factor_squarefull(n)
    divs = np.array([0.0], dtype=np.float64)
    for p, e in exps.items():
        lp = math.log(p)
        divs = (divs[:, None] + np.arange(e + 1)[None, :] * lp).reshape(-1)
    return divs


def _factor_squarefull(n: int) -> dict[int, int]:
    """Factor a square-full n: trial division to n^(1/3); the leftover has all
    exponents >= 2 and no prime <= its cube root, so it is p^2 with p prime."""
    out: dict[int, int] = {}
    m = n
    p = 2
    while p * p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
        p += 1 if p == 2 else 2
    if m > 1:
        r = isqrt(m)
        if r * r != m:
            raise DomainError(f"{n} is not square-full")
        out[r] = out.get(r, 0) + 2
    return out


def weighted_fn_mean(indicator: str, spec: IntervalSpec, t_grid=DEFAULT_T_GRID) -> LawReport:
    """Indicator-weighted mean of F_n(t) over the window, with the matching
    beta-law prediction."""
    ts = tuple(float(t) for t in t_grid)
    if indicator == "squarefull":
        count, sums = _squarefull_window_mean(spec, ts)
    elif indicator == "two_squares":
        masks = two_squares_count_and_masks(spec.lo, spec.hi, chunk=_CHUNK)
        count, sums = _mean_divisor_cdf(spec.lo, spec.hi, ts, mask_chunks=masks)
        if count == 0:
            raise EmptyIntervalError(f"no sums of two squares in ({spec.lo}, {spec.hi}]")
    else:
        raise DomainError(f"unknown indicator {indicator!r}")
    return _make_report(indicator, spec.x, spec.y, spec.theta, ts, count, sums)


def error_profile(indicator: str, xs, theta: float, t_grid=DEFAULT_T_GRID, kappa1: float | None = None) -> list[LawReport]:
    """One LawReport per x; exhibits the decay of sup_error along xs."""
    xs = list(xs)
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("xs must be strictly increasing")
    if kappa1 is None:
        kappa1 = 2.0 if indicator == "squarefull" else 1.0
    out = []
    for x in xs:
        spec = IntervalSpec(x=int(x), theta=float(theta), kappa1=kappa1)
        out.append(weighted_fn_mean(indicator, spec, t_grid))
    return out
