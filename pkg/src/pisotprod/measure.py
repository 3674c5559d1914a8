"""Bernoulli-convolution measures over quadratic Pisot bases.

Cylinder masses of the fractional-part measure mu* come from exact
rational matrix products against the exact stationary vector, so the
partition and refinement identities hold with equality.  Interval
measures refine greedily down the partition tree to tolerance
`REFINE_TOL`; the full measure mu_p on [0, alpha] is reduced to mu*-data
through the geometric covering of the support (powers of 1/beta from the
left, their mirror images from the right).  An independent Monte Carlo
estimator samples the defining random power series directly.

Interval endpoints at 0, 1 and alpha are treated as carrying no mass
(non-atomicity of mu_p for positive p is assumed, as discussed in the
README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .betanum import AffineMap, BetaNumber, NumerationSystem, mat3_vec, row_mat3
from .errors import DomainError, GuardError

__all__ = [
    "StationaryVector",
    "MeasureEstimate",
    "CylinderWord",
    "stationary_vector",
    "cylinder_interval",
    "cylinder_measure",
    "star_cdf",
    "star_interval",
    "full_cdf",
    "full_measure",
    "monte_carlo",
    "monte_carlo_batch",
    "h_profile",
]

#: refinement tolerance for interval measures
REFINE_TOL = Fraction(1, 10**10)

#: refinement depth guard
MAX_REFINE_DEPTH = 2000

#: samples per Monte Carlo stratum; estimates are sums over strata with
#: per-stratum substreams, so results do not depend on how strata are
#: distributed over workers
MC_STRATUM = 1 << 15

#: power-iteration bounds
POWER_TOL = 1e-12
POWER_CAP = 100_000


@dataclass(frozen=True)
class StationaryVector:
    """Masses of [0,1]+i over the carry offsets i, scaled so v1 + v2 = 1."""

    values: tuple[Fraction, Fraction, Fraction] | tuple[float, float, float]
    residual: float
    method: str


def stationary_vector(sys: NumerationSystem, method: str = "exact") -> StationaryVector:
    """Fixed point of the summed cylinder generators.

    `exact` returns the rational kernel vector computed at system build
    time (residual is identically zero).  `power` runs float power
    iteration to residual < 1e-12 as an independent route; both agree to
    that tolerance.
    """
    if method == "exact":
        return StationaryVector(values=sys.stationary, residual=0.0, method="exact")
    if method != "power":
        raise DomainError(f"unknown method {method!r}")
    agg = [[0.0] * 3 for _ in range(3)]
    for m in sys.cylinder_matrices:
        for i in range(3):
            for j in range(3):
                agg[i][j] += float(m[i][j])
    w = [1.0, 1.0, 1.0]
    for _ in range(POWER_CAP):
        nxt = [sum(agg[i][k] * w[k] for k in range(3)) for i in range(3)]
        s = nxt[0] + nxt[1]
        if s <= 0:
            raise DomainError("power iteration collapsed (degenerate p)")
        nxt = [x / s for x in nxt]
        residual = max(abs(x - y) for x, y in zip(nxt, w))
        w = nxt
        if residual < POWER_TOL:
            res = max(
                abs(sum(agg[i][k] * w[k] for k in range(3)) - w[i]) for i in range(3)
            )
            return StationaryVector(values=tuple(w), residual=res, method="power")
    raise DomainError("power iteration did not converge (degenerate p?)")


@dataclass(frozen=True)
class MeasureEstimate:
    """A measure value with its uncertainty and provenance."""

    value: Fraction | float
    stderr: float
    method: str  # "exact-matrix" | "refinement" | "monte-carlo"


@dataclass(frozen=True)
class CylinderWord:
    """Letters over the partition alphabet with the exact image interval."""

    letters: tuple[int, ...]
    left: BetaNumber
    right: BetaNumber


def _validate_word(sys: NumerationSystem, letters) -> tuple[int, ...]:
    w = tuple(letters)
    for x in w:
        if not 0 <= x < sys.alphabet_size:
            raise DomainError(f"letter {x} outside partition alphabet")
    return w


def cylinder_interval(sys: NumerationSystem, letters) -> CylinderWord:
    """Exact endpoints of the nested image S_w1 o ... o S_wn([0, 1])."""
    w = _validate_word(sys, letters)
    comp = AffineMap(sys.base.one, sys.base.zero)
    for x in w:
        comp = comp.compose(sys.partition_maps[x])
    return CylinderWord(letters=w, left=comp(sys.base.zero), right=comp(sys.base.one))


def _cylinder_row(sys: NumerationSystem, letters) -> tuple[Fraction, ...]:
    row = (Fraction(1), Fraction(1), Fraction(0))
    for x in letters:
        row = row_mat3(row, sys.cylinder_matrices[x])
    return row


def _dot3(r, v) -> Fraction:
    return r[0] * v[0] + r[1] * v[1] + r[2] * v[2]


def cylinder_measure(sys: NumerationSystem, letters) -> MeasureEstimate:
    """Exact mu* mass of a partition cylinder: (1 1 0) M_w1 ... M_wn V."""
    w = _validate_word(sys, letters)
    if not w:
        raise DomainError("cylinder word must be nonempty")
    value = _dot3(_cylinder_row(sys, w), sys.stationary)
    if value <= 0:
        raise GuardError(f"cylinder {w} has nonpositive measure {value}")
    return MeasureEstimate(value=value, stderr=0.0, method="exact-matrix")


def star_cdf(sys: NumerationSystem, t: BetaNumber | Fraction | int, tol: Fraction = REFINE_TOL) -> MeasureEstimate:
    """mu*([0, t]) for exact t in [0, 1], by greedy cylinder refinement.

    Full sub-cylinders left of t are summed exactly level by level; the
    walk stops when t coincides with a cylinder endpoint (exact value,
    stderr 0) or when the undecided remainder cylinder has mass < tol
    (reported as stderr; the value is then a lower bound).
    """
    if not isinstance(t, BetaNumber):
        t = sys.base.num(t)
    return _star_cdf_cached(sys, t, tol)


@lru_cache(maxsize=8192)
def _star_cdf_cached(sys: NumerationSystem, t: BetaNumber, tol: Fraction) -> MeasureEstimate:
    if t < sys.base.zero or t > sys.base.one:
        raise DomainError("star_cdf argument must lie in [0, 1]")
    if t == sys.base.zero:
        return MeasureEstimate(value=Fraction(0), stderr=0.0, method="refinement")
    if t == sys.base.one:
        return MeasureEstimate(value=Fraction(1), stderr=0.0, method="refinement")
    value = Fraction(0)
    row = (Fraction(1), Fraction(1), Fraction(0))
    comp = AffineMap(sys.base.one, sys.base.zero)
    for _ in range(MAX_REFINE_DEPTH):
        remainder_bound = _dot3(row, sys.stationary)
        if remainder_bound < tol:
            return MeasureEstimate(value=value, stderr=float(remainder_bound), method="refinement")
        for e in range(sys.alphabet_size):
            child = comp.compose(sys.partition_maps[e])
            right = child(sys.base.one)
            if t > right:
                value += _dot3(row_mat3(row, sys.cylinder_matrices[e]), sys.stationary)
                continue
            if t == right:
                value += _dot3(row_mat3(row, sys.cylinder_matrices[e]), sys.stationary)
                return MeasureEstimate(value=value, stderr=0.0, method="refinement")
            if t == child(sys.base.zero):
                return MeasureEstimate(value=value, stderr=0.0, method="refinement")
            row = row_mat3(row, sys.cylinder_matrices[e])
            comp = child
            break
        else:
            raise GuardError("point escaped the partition (tiling broken)")
    raise GuardError("refinement depth guard exceeded")


def star_interval(sys: NumerationSystem, lo, hi, tol: Fraction = REFINE_TOL) -> MeasureEstimate:
    """mu*([lo, hi]) for exact endpoints in [0, 1]."""
    a = star_cdf(sys, lo, tol)
    b = star_cdf(sys, hi, tol)
    return MeasureEstimate(value=b.value - a.value, stderr=a.stderr + b.stderr, method="refinement")


def _scale_up(sys: NumerationSystem, t: BetaNumber) -> tuple[int, BetaNumber]:
    """Smallest k >= 0 with beta^k t > 1/beta; returns (k, beta^k t)."""
    inv_beta = sys.base.beta.inverse()
    k = 0
    while not t > inv_beta:
        t = t * sys.base.beta
        k += 1
    return k, t


def _upper_zone_cdf(sys: NumerationSystem, t: BetaNumber, tol: Fraction):
    """mu_p([0, t]) minus mu_p([0, alpha-1]) for t in (1/beta, 1].

    On [alpha-1, 1] the full and fractional-part measures agree, so this
    is a mu* increment.
    """
    hi = star_cdf(sys, t, tol)
    lo = star_cdf(sys, sys.alpha - 1, tol)
    return hi.value - lo.value, hi.stderr + lo.stderr


@lru_cache(maxsize=256)
def _left_tail_cdf(sys: NumerationSystem, tol: Fraction):
    """mu_p([0, alpha-1]), from the scaling fixed-point equation.

    Scaling [0, alpha-1] up by beta^k lands in (1/beta, 1]; the measure
    solves F = p0^k (F + c) with the exactly computable increment c.
    """
    k, s = _scale_up(sys, sys.alpha - 1)
    if k == 0:
        raise GuardError("alpha - 1 should not exceed 1/beta")
    c, err = _upper_zone_cdf(sys, s, tol)
    scale = sys.p[0] ** k
    value = scale * c / (1 - scale)
    return value, float(err) * float(scale / (1 - scale))


def full_cdf(sys: NumerationSystem, t: BetaNumber | Fraction | int, tol: Fraction = REFINE_TOL) -> MeasureEstimate:
    """mu_p([0, t]) for exact t in [0, alpha]."""
    if not isinstance(t, BetaNumber):
        t = sys.base.num(t)
    if t < sys.base.zero or t > sys.alpha:
        raise DomainError("full_cdf argument must lie in [0, alpha]")
    if t == sys.base.zero:
        return MeasureEstimate(value=Fraction(0), stderr=0.0, method="refinement")
    if t == sys.alpha:
        return MeasureEstimate(value=Fraction(1), stderr=0.0, method="refinement")
    if t <= sys.base.one:
        base_val, base_err = _left_tail_cdf(sys, tol)
        k, s = _scale_up(sys, t)
        scale = sys.p[0] ** k
        inc, inc_err = _upper_zone_cdf(sys, s, tol)
        return MeasureEstimate(
            value=scale * (base_val + inc),
            stderr=float(scale) * (base_err + float(inc_err)),
            method="refinement",
        )
    # t in (1, alpha): mirror the right tail [t, alpha] through the
    # covering by alpha - [1/beta^{j+1}, 1/beta^j].  All full pieces map
    # onto the same image [alpha-1, alpha-1/beta], so their contributions
    # form an exact geometric series; only the outermost (partial) piece
    # needs its own refinement.
    s = sys.alpha - t  # right-tail width, in (0, alpha-1)
    pbar = sys.p[-1]
    inv_beta = sys.base.beta.inverse()
    j_min = 0
    low = inv_beta  # 1/beta^{j_min+1}
    bpow = sys.base.one  # beta^{j_min}
    while not low < s:
        low = low * inv_beta
        bpow = bpow * sys.base.beta
        j_min += 1
    partial = star_interval(sys, sys.alpha - bpow * s, sys.alpha - inv_beta, tol)
    full_piece = star_interval(sys, sys.alpha - 1, sys.alpha - inv_beta, tol)
    geo = pbar ** (j_min + 1) / (1 - pbar)
    tail = pbar**j_min * partial.value + geo * full_piece.value
    err = float(pbar**j_min) * partial.stderr + float(geo) * full_piece.stderr
    return MeasureEstimate(value=1 - tail, stderr=err, method="refinement")


def full_measure(sys: NumerationSystem, lo, hi, tol: Fraction = REFINE_TOL) -> MeasureEstimate:
    """mu_p([lo, hi]) for exact endpoints, 0 <= lo <= hi <= alpha."""
    if not isinstance(lo, BetaNumber):
        lo = sys.base.num(lo)
    if not isinstance(hi, BetaNumber):
        hi = sys.base.num(hi)
    if lo > hi:
        raise DomainError("interval endpoints out of order")
    a = full_cdf(sys, lo, tol)
    b = full_cdf(sys, hi, tol)
    return MeasureEstimate(value=b.value - a.value, stderr=a.stderr + b.stderr, method="refinement")


def _series_tail_terms(sys: NumerationSystem, bound: float) -> int:
    """Terms K with (d-1) / (beta^K (beta - 1)) < bound."""
    beta = sys.base.beta_float()
    k = 1
    tail = (sys.digit_count - 1) / (beta - 1)
    while tail / beta**k >= bound:
        k += 1
    return k


def _draw_digits(rng, cum_p: np.ndarray, size) -> np.ndarray:
    return np.searchsorted(cum_p, rng.random(size), side="right")


def _stratum_hits(args) -> list[int]:
    """Hit counts of one fixed-size stratum (top level for process pools)."""
    p_float, beta, d_count, spans, k_terms, seed, stratum, m, fractional = args
    delta = 1e-12
    tail_mass = (d_count - 1) / (beta - 1)
    cum_p = np.cumsum(p_float)
    cum_p[-1] = 1.0
    edges = sorted({e for span in spans for e in span} | ({1.0} if fractional else set()))
    rng = np.random.default_rng([seed, stratum])
    digits = _draw_digits(rng, cum_p, (MC_STRATUM, k_terms))[:m]
    powers = beta ** (-np.arange(1, k_terms + 1, dtype=float))
    x = digits.astype(float) @ powers
    # samples within the truncation tail of a decision edge are redrawn
    # at doubled series length, up to four times
    tail = delta
    for doubling in range(1, 5):
        ref = np.where(x >= 1.0, x - 1.0, x) if fractional else x
        near = np.zeros(len(x), dtype=bool)
        for e in edges:
            near |= np.abs(ref - e) <= tail
        idx = np.flatnonzero(near)
        if idx.size == 0:
            break
        k2 = k_terms * 2**doubling
        digits2 = _draw_digits(rng, cum_p, (idx.size, k2))
        powers2 = beta ** (-np.arange(1, k2 + 1, dtype=float))
        x[idx] = digits2.astype(float) @ powers2
        tail = tail_mass / beta**k2
    vals = np.where(x >= 1.0, x - 1.0, x) if fractional else x
    return [int(np.count_nonzero((vals >= flo) & (vals <= fhi))) for flo, fhi in spans]


def monte_carlo_batch(
    sys: NumerationSystem,
    intervals,
    n: int,
    seed: int = 0,
    fractional: bool = False,
    jobs: int = 1,
) -> list[MeasureEstimate]:
    """Estimate several interval masses from one shared sample of size n.

    Samples are the truncated random series sum omega_k beta^-k with
    i.i.d. digits of law p (truncation tail < 1e-12); `fractional`
    reduces values mod 1 to target mu*.  Samples landing within the tail
    bound of an interval endpoint are redrawn at doubled length, up to
    four times.  Deterministic in `seed`: fixed-size strata carry their
    own substreams, so the result does not depend on `jobs` or on how
    strata are distributed over workers.
    """
    if n < 1:
        raise DomainError("sample count must be >= 1")
    spans = []
    for lo, hi in intervals:
        flo, fhi = float(lo), float(hi)
        if flo > fhi:
            raise DomainError("interval endpoints out of order")
        spans.append((flo, fhi))
    spans = tuple(spans)
    beta = sys.base.beta_float()
    k_terms = _series_tail_terms(sys, 1e-12)
    p_float = tuple(float(x) for x in sys.p)
    tasks = []
    remaining, stratum = n, 0
    while remaining > 0:
        m = min(MC_STRATUM, remaining)
        tasks.append((p_float, beta, sys.digit_count, spans, k_terms, seed, stratum, m, fractional))
        remaining -= m
        stratum += 1
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(_stratum_hits, tasks))
    else:
        counts = [_stratum_hits(t) for t in tasks]
    hits = [sum(c[i] for c in counts) for i in range(len(spans))]
    out = []
    for h in hits:
        phat = h / n
        stderr = math.sqrt(max(phat * (1.0 - phat), 0.0) / n)
        out.append(MeasureEstimate(value=phat, stderr=stderr, method="monte-carlo"))
    return out


def monte_carlo(
    sys: NumerationSystem,
    lo,
    hi,
    n: int,
    seed: int = 0,
    fractional: bool = False,
    jobs: int = 1,
) -> MeasureEstimate:
    """Monte Carlo mass of one interval; see `monte_carlo_batch`."""
    return monte_carlo_batch(sys, [(lo, hi)], n, seed=seed, fractional=fractional, jobs=jobs)[0]


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = x._mpf_
    fr = Fraction(man) * (Fraction(2) ** exp if exp >= 0 else Fraction(1, 2 ** (-exp)))
    return -fr if sign else fr


def h_profile(sys: NumerationSystem, x: float, tol: Fraction = REFINE_TOL) -> float:
    """p0^x * mu_p([0, beta^x]) for x <= 0 (1-periodic in exact arithmetic).

    beta^x is evaluated to 30 digits and snapped to the exactly
    representable rational below that precision; the remaining input
    error is far below the refinement tolerance.
    """
    import mpmath

    if x > 0:
        raise DomainError("profile argument must be <= 0")
    with mpmath.workdps(30):
        t_mp = mpmath.power(sys.base.beta_mpf(30), x)
    t = _mpf_to_fraction(t_mp)
    if t > 1:
        t = Fraction(1)
    val = full_cdf(sys, t, tol).value
    return float(sys.p[0]) ** x * float(val)
