"""Box partition of the critical strip, zero/small-value classification, the
zero-detour contour, and empirical envelope checks.

Desk-scale geometry: boxes are width 1/(kappa_1 log T) and height log T /
kappa_1.  Classification in the low range counts zeros of the zeta*L product
by the argument principle around a half-open-adjusted rectangle; in the high
range it thresholds the sampled minimum of |zeta L M_N|.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import arith, specfun
from .errors import (
    AccuracyError,
    BoundaryZeroError,
    ContourBlockedError,
    ConvergenceError,
    DomainError,
)
from .sdexpand import SeriesSpec

__all__ = [
    "ContourConfig",
    "BoxGrid",
    "ContourPolyline",
    "frak_m",
    "build_grid",
    "classify_boxes",
    "build_contour",
    "check_prop31",
    "count_w_per_column",
    "bombieri_check",
    "zl_product_many",
    "zl_coeffs",
    "m_series_coeffs",
    "contour_report",
]

_SCAN_PARAMS = specfun.EvalParams(target_abs_tol=1e-9)


@dataclass(frozen=True)
class ContourConfig:
    """Free constants of the construction; all echoed into every report."""

    T: float
    epsilon: float = 0.05
    C0: float = 1.0
    c0: float = 1.0
    Aprime: int = 10
    psi: float = 2.4
    eta: float = 9.0
    grid_density: int = 8
    nj_cap: int = 10**6

    def __post_init__(self):
        if self.T < 50:
            raise DomainError("T must be at least 50")
        if not 0.0 < self.epsilon < 0.25:
            raise DomainError("epsilon must lie in (0, 1/4)")
        if self.C0 <= 0 or self.c0 <= 0:
            raise DomainError("C0 and c0 must be positive")
        if self.Aprime < 2:
            raise DomainError("Aprime must be an integer >= 2")
        if self.grid_density < 4:
            raise DomainError("grid_density must be at least 4")

    def describe(self) -> dict:
        return {
            "T": self.T,
            "epsilon": self.epsilon,
            "C0": self.C0,
            "c0": self.c0,
            "Aprime": self.Aprime,
            "psi": self.psi,
            "eta": self.eta,
            "grid_density": self.grid_density,
            "nj_cap": self.nj_cap,
        }


@dataclass
class BoxGrid:
    config: ContourConfig
    spec: SeriesSpec
    delta_T: float
    J_T: int
    K_T: int
    sigma: np.ndarray         # edges sigma_0..sigma_{J_T+1}
    tau: np.ndarray           # edges tau_0..tau_{K_T+1}
    N_j: np.ndarray
    nj_capped: np.ndarray
    frak_m_values: dict
    classes: np.ndarray       # (J_T+1, K_T+1): -1 unset, 0 Y, 1 W
    windings: np.ndarray      # rounded winding numbers (low range), else -1
    sampled_min: np.ndarray   # sampled min of |zeta L M_N| (high range), else nan

    def regime_low(self, j: int) -> bool:
        k1 = self.spec.kappa1
        return self.sigma[j] <= (1.0 - self.config.epsilon) / k1 + 1e-15

    def column_tops(self) -> np.ndarray:
        """j_k = max{j : box (j, k) marked W}, -1 when the column is all Y."""
        if np.any(self.classes < 0):
            raise DomainError("classify the grid first")
        tops = np.full(self.K_T + 1, -1, dtype=np.int64)
        for k in range(self.K_T + 1):
            ws = np.nonzero(self.classes[:, k] == 1)[0]
            tops[k] = int(ws[-1]) if ws.size else -1
        return tops

    def in_marked_region(self, s: complex) -> bool:
        """Point test against the union of columns' boxes up to j_k."""
        tops = self.column_tops()
        k1 = self.spec.kappa1
        lt = math.log(self.config.T)
        tau = abs(s.imag)
        k = math.floor((k1 * tau - 1.0) / lt)
        if k < 0 or k > self.K_T:
            return False
        j = math.floor((k1 * s.real - 0.5) * lt)
        if j < 0 or j > self.J_T:
            return False
        return j <= tops[k]


@dataclass(frozen=True)
class ContourPolyline:
    """Upper-half polyline; the full contour is its mirror image across the
    real axis joined at the starting point."""

    vertices: tuple[complex, ...]

    def full(self) -> tuple[complex, ...]:
        lower = tuple(v.conjugate() for v in reversed(self.vertices) if v.imag != 0)
        return lower + self.vertices

    def segments(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))


# ----------------------------------------------------------------------------
# zeta * L product and Dirichlet polynomial evaluation
# ----------------------------------------------------------------------------

def zl_product_many(
    s: np.ndarray, spec: SeriesSpec, params: specfun.EvalParams = _SCAN_PARAMS
) -> np.ndarray:
    """prod_i zeta(kappa_i s) L(kappa_i s, chi_i) on an array of points.

    Components with chi_i = None contribute only their zeta factor, so pure
    zeta products are covered by the same machinery.
    """
    s = np.asarray(s, dtype=np.complex128)
    out = np.ones_like(s)
    for k, chi in zip(spec.kappa.kappa, spec.chis):
        out = out * specfun.zeta_many(k * s, params)
        if chi is not None:
            out = out * specfun.dirichlet_l_many(k * s, chi, params)
    return out


def zl_coeffs(spec: SeriesSpec, limit: int) -> arith.CoeffVector:
    """Dirichlet coefficients of the zeta*L product (L streams skipped where
    the character is absent)."""
    kv = arith.KappaVector(tuple(spec.kappa.kappa))
    kappas = kv.integer_exponents()
    exact = all(chi is None or chi.is_real_integer for chi in spec.chis)
    acc = arith.unit_coeffs(limit).values
    if not exact:
        acc = acc.astype(np.complex128)
    for k in kappas:
        acc = arith._sparse_convolve(
            acc, arith._power_stream(limit, k, exact=exact), limit
        )
    for k, chi in zip(kappas, spec.chis):
        if chi is not None:
            acc = arith._sparse_convolve(
                acc, arith._power_stream(limit, k, weights=chi, exact=exact), limit
            )
    return arith.CoeffVector(limit, acc)


def m_series_coeffs(spec: SeriesSpec, limit: int) -> arith.CoeffVector:
    """Coefficients of the truncated inverse series M_x: exactly the Dirichlet
    inverse of the product's coefficient stream, cut at the limit."""
    return arith.dirichlet_inverse(zl_coeffs(spec, limit))


def _dirichlet_poly(s: np.ndarray, coeff_values: np.ndarray) -> np.ndarray:
    """sum_n c_n n^{-s} for c = coeff_values[1:], vectorized and chunked."""
    s = np.asarray(s, dtype=np.complex128)
    support = np.nonzero(coeff_values[1:])[0] + 1
    logn = np.log(support.astype(np.float64))
    cvals = coeff_values[support].astype(np.complex128)
    chunk = max(1, (1 << 22) // max(support.size, 1))
    flat = s.reshape(-1)
    res = np.empty_like(flat)
    for i in range(0, flat.size, chunk):
        block = flat[i : i + chunk, None]
        res[i : i + chunk] = (cvals[None, :] * np.exp(-block * logn[None, :])).sum(axis=1)
    return res.reshape(s.shape)


# ----------------------------------------------------------------------------
# frak M: grid maximum of |prod zeta(kappa_i s)|^2
# ----------------------------------------------------------------------------

def frak_m(
    varsigma: float,
    T: float,
    spec: SeriesSpec,
    density: int = 8,
    refine_check: bool = True,
) -> float:
    """Grid maximum of |prod_i zeta(kappa_i s)|^2 over sigma >= varsigma,
    1 <= |tau| <= T, at `density` samples per box side.

    The sigma scan stops at 2/kappa_1 where the absolutely-convergent triangle
    bound prod zeta(2 kappa_i/kappa_1)^2 takes over (the max of the two is
    returned).  Conjugate symmetry reduces tau to [1, T].
    """
    k1 = spec.kappa1
    if varsigma < 1.0 / (2.0 * k1) - 1e-12:
        raise DomainError("varsigma below 1/(2 kappa_1)")
    if T < 3:
        raise DomainError("T too small")

    def grid_max(dens: int) -> float:
        lt = math.log(T)
        width = 1.0 / (k1 * lt)
        height = lt / k1
        sig_hi = max(2.0 / k1, varsigma)
        sig = np.arange(varsigma, sig_hi + width / dens, width / dens)
        taus = np.arange(1.0, T + height / dens, height / dens)
        taus = taus[taus <= T]
        best = 0.0
        for sg in sig:
            s = sg + 1j * taus
            vals = np.ones_like(s)
            for k in spec.kappa.kappa:
                vals = vals * specfun.zeta_many(k * s, _SCAN_PARAMS)
            best = max(best, float(np.max(np.abs(vals) ** 2)))
        return best

    base = grid_max(density)
    tail = 1.0
    for k in spec.kappa.kappa:
        tail *= specfun.zeta_complex(2.0 * k / k1).real ** 2
    base = max(base, tail)
    if refine_check:
        fine = max(grid_max(2 * density), tail)
        if abs(fine - base) > 0.05 * max(fine, base):
            raise AccuracyError(
                f"frak_m unstable under density doubling: {base:.6g} vs "
                f"{fine:.6g} at density {density}"
            )
    return base


# ----------------------------------------------------------------------------
# Grid construction and classification
# ----------------------------------------------------------------------------

def build_grid(cfg: ContourConfig, spec: SeriesSpec) -> BoxGrid:
    """Populate the box partition and the per-row truncation lengths N_j."""
    T = cfg.T
    if T < 200:
        warnings.warn(
            "T below 200: asymptotic constants are meaningless at this scale; "
            "structure checks only",
            stacklevel=2,
        )
    k1 = spec.kappa1
    lt = math.log(T)
    llt = math.log(lt)
    delta = cfg.C0 * lt ** (-2.0 / 3.0) * llt ** (-1.0 / 3.0)
    if delta >= 0.5:
        raise DomainError("delta_T >= 1/2; increase T or decrease C0")
    J = int(math.floor((0.5 - delta) * lt))
    K = int(math.floor(T / lt))
    sigma = (0.5 + np.arange(J + 2) / lt) / k1
    tau = (1.0 + np.arange(K + 2) * lt) / k1

    nj = np.zeros(J + 1)
    capped = np.zeros(J + 1, dtype=bool)
    fm_cache: dict[float, float] = {}
    for j in range(J + 1):
        varsigma = 4.0 * sigma[j] - 3.0 / k1
        clamped = max(varsigma, 1.0 / (2.0 * k1))
        if clamped not in fm_cache:
            fm_cache[clamped] = frak_m(
                clamped, 8.0 * T, spec, cfg.grid_density, refine_check=False
            )
        fm = fm_cache[clamped]
        expo = 1.0 / (2.0 * (1.0 / k1 - sigma[j]))
        log_raw = expo * (math.log(cfg.Aprime) + 5.0 * math.log(lt) + math.log(fm))
        if log_raw > math.log(cfg.nj_cap):
            nj[j] = cfg.nj_cap
            capped[j] = True
        else:
            nj[j] = math.exp(log_raw)
    shape = (J + 1, K + 1)
    return BoxGrid(
        config=cfg,
        spec=spec,
        delta_T=delta,
        J_T=J,
        K_T=K,
        sigma=sigma,
        tau=tau,
        N_j=nj,
        nj_capped=capped,
        frak_m_values={str(k): v for k, v in fm_cache.items()},
        classes=np.full(shape, -1, dtype=np.int8),
        windings=np.full(shape, -1, dtype=np.int64),
        sampled_min=np.full(shape, np.nan),
    )


def _rect_boundary(s_lo, s_hi, t_lo, t_hi, per_side: int) -> np.ndarray:
    """Counterclockwise boundary samples of a rectangle (no repeated corner)."""
    f = np.linspace(0.0, 1.0, per_side, endpoint=False)
    bottom = (s_lo + (s_hi - s_lo) * f) + 1j * t_lo
    right = s_hi + 1j * (t_lo + (t_hi - t_lo) * f)
    top = (s_hi - (s_hi - s_lo) * f) + 1j * t_hi
    left = s_lo + 1j * (t_hi - (t_hi - t_lo) * f)
    return np.concatenate([bottom, right, top, left])


def _winding_number(vals: np.ndarray) -> float:
    ratios = np.angle(np.roll(vals, -1) / vals)
    return float(ratios.sum() / (2.0 * math.pi))


def _classify_low_box(grid: BoxGrid, j: int, k: int) -> tuple[int, int]:
    """Zero count in (half-open) box by the argument principle.

    The winding rectangle is the box shifted left/down by half a box width and
    a small height fraction, matching the closed-left/open-right semantics:
    numerically relevant zeros sit on the left edge of the bottom row, which
    the shift turns into interior points.
    """
    cfg, spec = grid.config, grid.spec
    width = grid.sigma[j + 1] - grid.sigma[j]
    height = grid.tau[k + 1] - grid.tau[k]
    hs = 0.5 * width
    ht = height / 1024.0
    per_side = 4 * cfg.grid_density
    for attempt in range(4):
        ring = _rect_boundary(
            grid.sigma[j] - hs,
            grid.sigma[j + 1] - hs,
            grid.tau[k] - ht,
            grid.tau[k + 1] - ht,
            per_side,
        )
        vals = zl_product_many(ring, spec)
        if float(np.min(np.abs(vals))) < 1e-8:
            per_side *= 2
            continue
        wind = _winding_number(vals)
        if abs(wind - round(wind)) < 0.1:
            return int(round(wind)), per_side
        per_side *= 2
    raise BoundaryZeroError(
        f"box (j={j}, k={k}): boundary too close to a zero after 3 retries"
    )


def _classify_high_box(grid: BoxGrid, j: int, k: int, m_coeffs) -> float:
    cfg = grid.config
    g = cfg.grid_density
    off = (np.arange(g) + 0.5) / g
    sig = grid.sigma[j] + (grid.sigma[j + 1] - grid.sigma[j]) * off
    tau = grid.tau[k] + (grid.tau[k + 1] - grid.tau[k]) * off
    pts = (sig[:, None] + 1j * tau[None, :]).reshape(-1)
    vals = zl_product_many(pts, grid.spec) * _dirichlet_poly(pts, m_coeffs)
    return float(np.min(np.abs(vals)))


def classify_boxes(grid: BoxGrid) -> BoxGrid:
    """Fill the W/Y classes: argument-principle zero counts in the low range,
    sampled |zeta L M_N| minima against the 1/2 threshold in the high range."""
    m_cache: dict[int, np.ndarray] = {}
    for j in range(grid.J_T + 1):
        if grid.regime_low(j):
            for k in range(grid.K_T + 1):
                wind, _ = _classify_low_box(grid, j, k)
                grid.windings[j, k] = wind
                grid.classes[j, k] = 1 if wind >= 1 else 0
        else:
            nj = int(grid.N_j[j])
            if nj not in m_cache:
                m_cache[nj] = m_series_coeffs(grid.spec, nj).values
            for k in range(grid.K_T + 1):
                mn = _classify_high_box(grid, j, k, m_cache[nj])
                grid.sampled_min[j, k] = mn
                grid.classes[j, k] = 1 if mn < 0.5 else 0
    return grid


# ----------------------------------------------------------------------------
# Contour construction
# ----------------------------------------------------------------------------

def _dv(cfg: ContourConfig, k1: float, sigma_ref: float) -> float:
    if sigma_ref <= (1.0 - cfg.epsilon) / k1 + 1e-15:
        return cfg.epsilon**2 / k1
    return 1.0 / (k1 * math.log(cfg.T))


def build_contour(grid: BoxGrid, cfg: ContourConfig | None = None) -> ContourPolyline:
    """Upper polyline: per column a vertical run at sigma_{j_k+1} + d_v,
    horizontal jogs at d_h above/below the column boundary on the taller side."""
    cfg = cfg or grid.config
    spec = grid.spec
    k1 = spec.kappa1
    tops = grid.column_tops()
    blocked = np.nonzero(tops >= grid.J_T)[0]
    if blocked.size:
        raise ContourBlockedError(int(blocked[0]))
    d_h = math.log(math.log(cfg.T)) / k1
    sig_v = np.array(
        [grid.sigma[t + 1] + _dv(cfg, k1, grid.sigma[t + 1]) for t in tops]
    )
    verts: list[complex] = [complex(sig_v[0], 0.0)]
    for k in range(grid.K_T):
        a, b = sig_v[k], sig_v[k + 1]
        if a == b:
            continue
        boundary = grid.tau[k + 1]
        # jog below the boundary when moving right (taller marked region
        # ahead), above it when moving left (taller region behind)
        t_jog = boundary - d_h if b > a else boundary + d_h
        verts.append(complex(a, t_jog))
        verts.append(complex(b, t_jog))
    verts.append(complex(sig_v[grid.K_T], grid.tau[grid.K_T + 1]))
    return ContourPolyline(tuple(verts))


def contour_clear_of_marked(grid: BoxGrid, poly: ContourPolyline, samples_per_segment: int = 64) -> bool:
    for a, b in poly.segments():
        f = np.linspace(0.0, 1.0, samples_per_segment)
        pts = a + (b - a) * f
        for p in pts:
            if grid.in_marked_region(complex(p)):
                return False
    return True


# ----------------------------------------------------------------------------
# Envelope reports
# ----------------------------------------------------------------------------

def check_prop31(
    poly: ContourPolyline, grid: BoxGrid, cfg: ContourConfig | None = None
) -> dict:
    """Extremal log-gaps between |zeta L| on the contour and the two envelope
    shapes T^{+-c(eps) (1-kappa_1 sigma)} (log T)^{+-4} (constants free)."""
    cfg = cfg or grid.config
    spec = grid.spec
    k1 = spec.kappa1
    lt = math.log(cfg.T)
    llt = math.log(lt)
    c_up = 136.0 * math.sqrt(2.0 * cfg.epsilon)
    c_lo = 544.0 * math.sqrt(2.0 * cfg.epsilon)
    step_v = (lt / k1) / (4.0 * cfg.grid_density)
    step_h = (1.0 / (k1 * lt)) / (4.0 * cfg.grid_density)
    pts = []
    for a, b in poly.segments():
        length = abs(b - a)
        step = step_h if a.imag == b.imag else step_v
        n = max(2, int(math.ceil(length / step)) + 1)
        f = np.linspace(0.0, 1.0, n)
        pts.append(a + (b - a) * f)
    s = np.concatenate(pts)
    s = s[s.imag >= 1.0]  # envelopes are tau >= 1 statements
    vals = zl_product_many(s, spec)
    log_abs = np.log(np.abs(vals))
    shape = (1.0 - k1 * s.real) * lt
    log_up = c_up * shape + 4.0 * llt
    log_lo = -c_lo * shape - 4.0 * llt
    up_ratio = float(np.max(log_abs - log_up))
    lo_ratio = float(np.max(log_lo - log_abs))
    if not (math.isfinite(up_ratio) and math.isfinite(lo_ratio)):
        raise AccuracyError("non-finite envelope log-ratio")
    return {
        "max_upper_logratio": up_ratio,
        "max_lower_logratio": lo_ratio,
        "samples": int(s.size),
    }


def count_w_per_column(grid: BoxGrid) -> dict:
    """|{k : box (j,k) marked W}| per j, with the zero-density envelope shape
    T^{psi (1-kappa_1 sigma_j)} (log T)^eta for comparison (constants free)."""
    if np.any(grid.classes < 0):
        raise DomainError("classify the grid first")
    cfg = grid.config
    k1 = grid.spec.kappa1
    lt = math.log(cfg.T)
    counts = [int((grid.classes[j] == 1).sum()) for j in range(grid.J_T + 1)]
    envelope = [
        float(cfg.T ** (cfg.psi * (1.0 - k1 * grid.sigma[j])) * lt**cfg.eta)
        for j in range(grid.J_T + 1)
    ]
    return {"counts": counts, "envelope": envelope}


# ----------------------------------------------------------------------------
# Bombieri-type inequality check
# ----------------------------------------------------------------------------

def bombieri_check(
    points,
    a,
    b=None,
    margin: float = 0.1,
    params: specfun.EvalParams = specfun.DEFAULT_PARAMS,
) -> bool:
    """Verify sum_s |sum_n a_n n^{-s}|^2 <= (sum |a_n|^2 / b_n) *
    max_s sum_{s'} |B(conj(s) + s')|.

    b=None uses b_n = 1 for all n (B = zeta), which requires
    min Re(conj(s)+s') > 1 + margin for absolute convergence; an explicit
    finite b sequence is treated as a Dirichlet polynomial.
    """
    pts = [complex(p) for p in points]
    if not pts:
        raise DomainError("need at least one point")
    a = np.asarray(a, dtype=np.complex128)
    n = a.size
    ns = np.arange(1, n + 1, dtype=np.float64)
    if b is None:
        min_re = min((p.conjugate() + q).real for p in pts for q in pts)
        if min_re <= 1.0 + margin:
            raise ConvergenceError(
                f"need min Re(conj(s)+s') > {1.0 + margin}, got {min_re}"
            )
        b_std = None
    else:
        b_std = np.asarray(b, dtype=np.float64)
        if np.any(b_std < 0):
            raise DomainError("b must be non-negative")
        if np.any((np.abs(a) > 0) & (b_std[: a.size] <= 0)):
            raise DomainError("b_n must be positive wherever a_n is nonzero")

    logn = np.log(ns)
    lhs = 0.0
    for p in pts:
        lhs += abs(np.sum(a * np.exp(-p * logn))) ** 2

    if b_std is None:
        weight = float(np.sum(np.abs(a) ** 2))
    else:
        nz = np.abs(a) > 0
        weight = float(np.sum(np.abs(a[nz]) ** 2 / b_std[: a.size][nz]))

    best = 0.0
    for p in pts:
        tot = 0.0
        for q in pts:
            s = p.conjugate() + q
            if b_std is None:
                tot += abs(specfun.zeta_complex(s, params))
            else:
                m = np.arange(1, b_std.size + 1, dtype=np.float64)
                tot += abs(np.sum(b_std * np.exp(-s * np.log(m))))
        best = max(best, tot)
    rhs = weight * best
    return lhs <= rhs * (1.0 + 1e-12)


# ----------------------------------------------------------------------------
# Full report
# ----------------------------------------------------------------------------

def contour_report(cfg: ContourConfig, spec: SeriesSpec) -> dict:
    """Build, classify, route, and measure; returns the full JSON-ready dict."""
    grid = build_grid(cfg, spec)
    classify_boxes(grid)
    poly = build_contour(grid)
    prop31 = check_prop31(poly, grid)
    wcounts = count_w_per_column(grid)
    return {
        "config": cfg.describe(),
        "spec": spec.describe(),
        "delta_T": grid.delta_T,
        "J_T": grid.J_T,
        "K_T": grid.K_T,
        "sigma": [float(v) for v in grid.sigma],
        "tau_first": float(grid.tau[0]),
        "tau_last": float(grid.tau[-1]),
        "N_j": [float(v) for v in grid.N_j],
        "N_j_capped": [bool(v) for v in grid.nj_capped],
        "classes": [
            "".join("W" if c == 1 else "Y" for c in grid.classes[j])
            for j in range(grid.J_T + 1)
        ],
        "w_counts": wcounts["counts"],
        "w_envelope": wcounts["envelope"],
        "contour_vertices": [[v.real, v.imag] for v in poly.vertices],
        "contour_clear": contour_clear_of_marked(grid, poly),
        "prop31": prop31,
    }
