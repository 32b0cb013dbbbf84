"""Singular-factor expansion machinery for Dirichlet series of the shape
prod zeta(k_i s)^{z_i} * prod L(k_i s, chi_i)^{w_i} * G(s): Taylor data around
s = 1/kappa_1, the derived main-term coefficients, and the short-interval
main-term evaluator.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import specfun
from .arith import CharacterTable, KappaVector, quadratic_character
from .errors import DomainError
from .powerseries import PowerSeries, ps_pow, taylor_at

__all__ = [
    "stieltjes_constants",
    "gamma_coeffs",
    "ConstantG",
    "ZetaCompositionG",
    "EulerProductG",
    "DirichletSeriesG",
    "SeriesSpec",
    "ExpansionCoeffs",
    "MainTermResult",
    "expansion_coeffs",
    "lambda0_closed_form",
    "main_term",
    "squarefull_series_spec",
    "two_squares_series_spec",
]


# ----------------------------------------------------------------------------
# Stieltjes constants by Euler-Maclaurin (cached, one-time cost)
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _log_poly_coeffs(k: int, m: int) -> tuple[Fraction, ...]:
    """Coefficients c_j with d^m/dt^m [(log t)^k / t] = t^{-(m+1)} sum c_j (log t)^j."""
    c = {k: Fraction(1)}
    for step in range(m):
        nxt: dict[int, Fraction] = {}
        for j, v in c.items():
            nxt[j] = nxt.get(j, Fraction(0)) - (step + 1) * v
            if j >= 1:
                nxt[j - 1] = nxt.get(j - 1, Fraction(0)) + j * v
        c = nxt
    return tuple(c.get(j, Fraction(0)) for j in range(k + 1))


@lru_cache(maxsize=None)
def stieltjes_constants(count: int) -> tuple[float, ...]:
    """gamma_0..gamma_{count-1} by Euler-Maclaurin on sum (log j)^k / j.

    The partial sums reach ~1e19 before cancellation for k near 24, so the
    accumulation runs at 60 decimal digits and is rounded once at the end.
    """
    if count > 30:
        raise DomainError("Stieltjes table capped at order 30")
    M, K = 1200, 18
    bern = specfun.bernoulli_numbers(2 * K)
    out = []
    with mpmath.workdps(60):
        logs = [mpmath.log(j) for j in range(1, M + 1)]
        for k in range(count):
            s = mpmath.mpf(0)
            for j in range(1, M + 1):
                s += logs[j - 1] ** k / j
            lM = logs[M - 1]
            s -= lM ** (k + 1) / (k + 1)
            s -= lM**k / (2 * M)
            for i in range(1, K + 1):
                coeffs = _log_poly_coeffs(k, 2 * i - 1)
                deriv = mpmath.mpf(0)
                for j, c in enumerate(coeffs):
                    if c:
                        deriv += mpmath.mpf(c.numerator) / c.denominator * lM**j
                deriv /= mpmath.mpf(M) ** (2 * i)
                s -= mpmath.mpf(bern[2 * i].numerator) / bern[2 * i].denominator / math.factorial(2 * i) * deriv
            out.append(float(s))
    return tuple(out)


def gamma_coeffs(z: complex, kappa: float, order: int) -> tuple[complex, ...]:
    """Taylor coefficients (index j) of {(kappa s - 1) zeta(kappa s)}^z about
    s = 1/kappa; entry j is gamma_j(z, kappa)/j!."""
    if order > 24:
        raise DomainError("gamma_coeffs order capped at 24")
    gam = stieltjes_constants(max(order, 1))
    base = [0j] * (order + 1)
    base[0] = 1.0 + 0j
    # (u-1) zeta(u) = 1 + sum_k (-1)^k gamma_k (u-1)^{k+1} / k!, with u = kappa s
    for k in range(order):
        base[k + 1] = (-1) ** k * gam[k] * kappa ** (k + 1) / math.factorial(k)
    series = PowerSeries(1.0 / kappa, tuple(base))
    return ps_pow(series, z).coeffs


# ----------------------------------------------------------------------------
# Regular-factor evaluators
# ----------------------------------------------------------------------------

class ConstantG:
    """G identically equal to a constant (default 1)."""

    def __init__(self, value: complex = 1.0):
        self.value = complex(value)

    def __call__(self, s: complex) -> complex:
        return self.value

    def describe(self) -> dict:
        return {"kind": "constant", "value": self.value.real}


class ZetaCompositionG:
    """G(s) = prod_j zeta(m_j s)^{e_j} (closed-form zeta composition)."""

    def __init__(self, factors, params: specfun.EvalParams = specfun.DEFAULT_PARAMS):
        self.factors = tuple((float(m), float(e)) for m, e in factors)
        self.params = params

    def __call__(self, s: complex) -> complex:
        out = 1.0 + 0j
        for m, e in self.factors:
            z = specfun.zeta_complex(m * s, self.params)
            out *= specfun.complex_pow_principal(z, e)
        return out

    def describe(self) -> dict:
        return {"kind": "zeta_composition", "factors": [list(f) for f in self.factors]}


class EulerProductG:
    """G(s) = prod extra (1-p0^{-a0 s})^{e0} * prod_{p<=P, p mod q in residues}
    (1-p^{-a s})^{e}, truncated at P with a recorded tail estimate."""

    def __init__(
        self,
        a: float,
        e: float,
        modulus: int,
        residues,
        prime_limit: int = 10**5,
        extra=(),
    ):
        self.a = float(a)
        self.e = float(e)
        self.modulus = int(modulus)
        self.residues = tuple(int(r) for r in residues)
        self.prime_limit = int(prime_limit)
        self.extra = tuple((int(p), float(aa), float(ee)) for p, aa, ee in extra)
        self._log_primes = None

    def _primes(self) -> np.ndarray:
        if self._log_primes is None:
            limit = self.prime_limit
            sieve = np.ones(limit + 1, dtype=bool)
            sieve[:2] = False
            for p in range(2, int(math.isqrt(limit)) + 1):
                if sieve[p]:
                    sieve[p * p :: p] = False
            primes = np.nonzero(sieve)[0]
            keep = np.isin(primes % self.modulus, self.residues)
            self._log_primes = np.log(primes[keep].astype(np.float64))
        return self._log_primes

    def __call__(self, s: complex) -> complex:
        s = complex(s)
        acc = 0j
        for p0, a0, e0 in self.extra:
            acc += e0 * cmath.log(1.0 - cmath.exp(-a0 * s * math.log(p0)))
        lp = self._primes()
        u = np.exp(-self.a * s * lp)
        acc += self.e * complex(np.sum(np.log1p(-u)))
        return cmath.exp(acc)

    def tail_log_estimate(self, sigma: float) -> float:
        """Deterministic bound on the neglected log-tail at real part sigma."""
        x = self.a * sigma
        if x <= 1.0:
            return math.inf
        P = float(self.prime_limit)
        density = len(self.residues) / max(1, self.modulus // 2)
        return abs(self.e) * density * P ** (1.0 - x) / ((x - 1.0) * math.log(P))

    def describe(self) -> dict:
        return {
            "kind": "euler_product",
            "a": self.a,
            "e": self.e,
            "modulus": self.modulus,
            "residues": list(self.residues),
            "prime_limit": self.prime_limit,
            "extra": [list(x) for x in self.extra],
        }


class DirichletSeriesG:
    """G(s) = sum_{n<=N} c_n n^{-s} (truncated series)."""

    def __init__(self, coeffs):
        self.coeffs = tuple(complex(c) for c in coeffs)

    def __call__(self, s: complex) -> complex:
        return sum(
            c * cmath.exp(-s * math.log(n))
            for n, c in enumerate(self.coeffs, start=1)
            if c != 0
        )

    def describe(self) -> dict:
        return {"kind": "dirichlet_series", "length": len(self.coeffs)}


# ----------------------------------------------------------------------------
# Series specification
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesSpec:
    """Descriptor of prod zeta(k_i s)^{z_i} prod L(k_i s, chi_i)^{w_i} G(s)
    together with its growth-bound metadata."""

    kappa: KappaVector
    z: tuple[complex, ...]
    w: tuple[complex, ...]
    chis: tuple[CharacterTable | None, ...]
    G: object = field(default_factory=ConstantG)
    bounds_B: tuple[float, ...] = ()
    bounds_C: tuple[float, ...] = ()
    alpha: float = 1.0
    delta: float = 0.0
    A: float = 0.0
    M: float = 1.0
    name: str = "series"

    def __post_init__(self):
        r = self.kappa.r
        if not (len(self.z) == len(self.w) == len(self.chis) == r):
            raise DomainError("z, w, chis must all have one entry per kappa")
        if self.bounds_B and any(
            abs(zi) > bi + 1e-12 for zi, bi in zip(self.z, self.bounds_B)
        ):
            raise DomainError("|z_i| must stay within bounds_B")
        if self.bounds_C and any(
            abs(wi) > ci + 1e-12 for wi, ci in zip(self.w, self.bounds_C)
        ):
            raise DomainError("|w_i| must stay within bounds_C")
        for wi, chi in zip(self.w, self.chis):
            if wi != 0:
                if chi is None:
                    raise DomainError("nonzero w_i requires a character")
                if chi.principal:
                    raise DomainError("characters must be non-principal")
        if self.alpha <= 0 or self.delta < 0 or self.A < 0 or self.M <= 0:
            raise DomainError("need alpha > 0, delta >= 0, A >= 0, M > 0")

    @property
    def r(self) -> int:
        return self.kappa.r

    @property
    def kappa1(self) -> float:
        return self.kappa.kappa[0]

    def describe(self) -> dict:
        return {
            "name": self.name,
            "kappa": list(self.kappa.kappa),
            "z": [[zi.real, zi.imag] for zi in map(complex, self.z)],
            "w": [[wi.real, wi.imag] for wi in map(complex, self.w)],
            "chi_moduli": [c.modulus if c is not None else None for c in self.chis],
            "G": self.G.describe(),
            "alpha": self.alpha,
            "delta": self.delta,
            "A": self.A,
            "M": self.M,
        }


def _regular_factor(spec: SeriesSpec, params: specfun.EvalParams):
    """The analytic-at-1/kappa_1 factor: non-leading zetas, all L's, and G."""

    def fn(s: complex) -> complex:
        out = complex(spec.G(s))
        for i in range(1, spec.r):
            if spec.z[i] != 0:
                zv = specfun.zeta_complex(spec.kappa.kappa[i] * s, params)
                out *= specfun.complex_pow_principal(zv, spec.z[i])
        for i in range(spec.r):
            if spec.w[i] != 0:
                lv = specfun.dirichlet_l(spec.kappa.kappa[i] * s, spec.chis[i], params)
                out *= specfun.complex_pow_principal(lv, spec.w[i])
        return out

    return fn


def _expansion_radius(spec: SeriesSpec) -> float:
    k = spec.kappa.kappa
    if spec.r >= 2:
        return 0.5 * (1.0 / k[0] - 1.0 / k[1])
    return 1.0 / (4.0 * k[0])


@dataclass(frozen=True)
class ExpansionCoeffs:
    """gamma_j/j!, g_l, and lambda_l arrays for a series spec."""

    order: int
    gamma_j: tuple[complex, ...]
    g_ell: tuple[complex, ...]
    lambda_ell: tuple[complex, ...]

    def records(self) -> list[dict]:
        return [
            {
                "ell": l,
                "g_re": g.real,
                "g_im": g.imag,
                "lambda_re": lam.real,
                "lambda_im": lam.imag,
            }
            for l, (g, lam) in enumerate(zip(self.g_ell, self.lambda_ell))
        ]


def expansion_coeffs(
    spec: SeriesSpec,
    order: int = 16,
    params: specfun.EvalParams = specfun.DEFAULT_PARAMS,
    radius: float | None = None,
) -> ExpansionCoeffs:
    """Taylor data at s = 1/kappa_1: leading-factor coefficients times the
    regular factor, and the main-term lambda sequence."""
    k1 = spec.kappa1
    z1 = complex(spec.z[0])
    gam = gamma_coeffs(z1, k1, order)
    rad = _expansion_radius(spec) if radius is None else float(radius)
    reg = taylor_at(_regular_factor(spec, params), 1.0 / k1, order, rad)
    g = [0j] * (order + 1)
    for j in range(order + 1):
        if gam[j] == 0:
            continue
        for m in range(order + 1 - j):
            g[j + m] += gam[j] * reg.coeffs[m]
    k1_pow = specfun.complex_pow_principal(k1, -z1)
    lam = [k1_pow * g[l] * specfun.reciprocal_gamma(z1 - l) for l in range(order + 1)]
    return ExpansionCoeffs(
        order=order,
        gamma_j=tuple(gam),
        g_ell=tuple(g),
        lambda_ell=tuple(lam),
    )


def lambda0_closed_form(
    spec: SeriesSpec, params: specfun.EvalParams = specfun.DEFAULT_PARAMS
) -> complex:
    """Leading coefficient, evaluated directly: G(1/k1) k1^{-z1} / Gamma(z1)
    times the non-leading zeta and L values at kappa_i/kappa_1."""
    k = spec.kappa.kappa
    k1 = k[0]
    z1 = complex(spec.z[0])
    out = complex(spec.G(1.0 / k1))
    out *= specfun.complex_pow_principal(k1, -z1)
    out *= specfun.reciprocal_gamma(z1)
    for i in range(1, spec.r):
        if spec.z[i] != 0:
            zv = specfun.zeta_complex(k[i] / k1, params)
            out *= specfun.complex_pow_principal(zv, spec.z[i])
    for i in range(spec.r):
        if spec.w[i] != 0:
            lv = specfun.dirichlet_l(k[i] / k1, spec.chis[i], params)
            out *= specfun.complex_pow_principal(lv, spec.w[i])
    return out


@dataclass(frozen=True)
class MainTermResult:
    value: complex
    y_prime: float
    envelope: float
    envelope_label: str = "reference shape"


def main_term(
    spec: SeriesSpec,
    x: float,
    y: float,
    n_terms: int = 0,
    coeffs: ExpansionCoeffs | None = None,
) -> MainTermResult:
    """Predicted window sum y' (log x)^{z1-1} sum_{l<=N} lambda_l (log x)^{-l}.

    The envelope is the remainder shape ((N+1)/log x)^{N+1}
    + (N+1)^{N+1} exp(-(log x / log log x)^{1/3}) + y/(x^{1/k1} log x),
    scaled by the spec's M; the free constants are fixed at 1, so it is a
    reference shape rather than a bound.
    """
    if x < 3:
        raise DomainError("x must be at least 3")
    k1 = spec.kappa1
    if y < 0 or y > x ** (1.0 / k1) * (1.0 + 1e-12):
        raise DomainError("need 0 <= y <= x^(1/kappa_1)")
    if n_terms < 0:
        raise DomainError("n_terms must be >= 0")
    L = math.log(x)
    y_prime = k1 * ((x + x ** (1.0 - 1.0 / k1) * y) ** (1.0 / k1) - x ** (1.0 / k1))
    if coeffs is None or coeffs.order < n_terms:
        coeffs = expansion_coeffs(spec, order=max(n_terms, 4))
    z1 = complex(spec.z[0])
    series = sum(coeffs.lambda_ell[l] / L**l for l in range(n_terms + 1))
    value = y_prime * specfun.complex_pow_principal(L, z1 - 1.0) * series
    n1 = n_terms + 1.0
    envelope = spec.M * (
        (n1 / L) ** n1
        + n1**n1 * math.exp(-((L / math.log(L)) ** (1.0 / 3.0)))
        + y / (x ** (1.0 / k1) * L)
    )
    if y == 0:
        value = 0j
    return MainTermResult(value=value, y_prime=y_prime, envelope=envelope)


# ----------------------------------------------------------------------------
# The two application instances
# ----------------------------------------------------------------------------

def squarefull_series_spec() -> SeriesSpec:
    """Indicator of square-full integers: zeta(2s) zeta(3s) / zeta(6s)."""
    return SeriesSpec(
        kappa=KappaVector((2.0, 3.0)),
        z=(1.0 + 0j, 1.0 + 0j),
        w=(0j, 0j),
        chis=(None, None),
        G=ZetaCompositionG(((6.0, -1.0),)),
        bounds_B=(1.5, 1.5),
        bounds_C=(1.0, 1.0),
        alpha=1.0,
        name="squarefull",
    )


def two_squares_series_spec(
    prime_limit: int = 10**5, wrong_congruence: bool = False
) -> SeriesSpec:
    """Indicator of sums of two squares: (zeta(s) L(s, chi4))^(1/2) G(s) with
    G(s) = (1-2^{-s})^{-1/2} prod_{p=3 (4)} (1-p^{-2s})^{-1/2}.

    wrong_congruence=True swaps the product to p = 1 (mod 4), the congruence
    class printed in the source formula, for the consistency cross-check.
    """
    residue = 1 if wrong_congruence else 3
    return SeriesSpec(
        kappa=KappaVector((1.0,)),
        z=(0.5 + 0j,),
        w=(0.5 + 0j,),
        chis=(quadratic_character(4),),
        G=EulerProductG(
            a=2.0,
            e=-0.5,
            modulus=4,
            residues=(residue,),
            prime_limit=prime_limit,
            extra=((2, 1.0, -0.5),),
        ),
        bounds_B=(1.0,),
        bounds_C=(1.0,),
        alpha=0.5,
        name="two_squares" + ("_wrong_congruence" if wrong_congruence else ""),
    )
