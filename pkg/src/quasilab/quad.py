"""Deterministic adaptive Gauss-Kronrod quadrature.

A 21-point Kronrod rule (with its embedded 10-point Gauss rule) is applied
per panel and the panel with the largest error estimate is bisected until
the global estimate meets ``max(abs_tol, rel_tol * |value|)``.  Panels are
kept in a heap keyed on (error, creation order), so the refinement sequence
and therefore the result are bit-reproducible.

Semi-infinite ranges ``[c, inf)`` go through the rational map
``r = c + L * s / (1 - s)``.  It is parametrised by ``w = 1 - s`` so that
the singular end of the map sits at ``w = 0`` where floating point keeps
full relative resolution; this lets the bisection follow slowly decaying
power tails out to ``r ~ 1e300``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import NonConvergence, NonFinite, ZeroSamples

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "TailEstimate",
    "integrate",
    "gk21",
    "classify_tail",
    "dyadic_samples",
    "geometric_breakpoints",
    "DEFAULT_SPEC",
]

# Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525230575,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full symmetric node set on [-1, 1] and matching weight vectors.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
for _k, _w in enumerate(_WG):
    _i = 2 * _k + 1
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[20 - _i] = _w

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2 ** 15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Spec with both tolerances divided by ``factor`` (for inner integrals)."""
        return QuadratureSpec(self.rel_tol / factor, self.abs_tol / factor,
                              self.max_subdivisions)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int = 1

    def __float__(self):
        return self.value


def _evaluate(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise NonFinite(f"integrand is not finite at x={bad!r}")
    return y


def gk21(f: Callable, a: float, b: float) -> tuple[float, float, float]:
    """One 21-point Gauss-Kronrod panel on [a, b].

    Returns ``(kronrod, gauss, error_estimate)`` where the error estimate
    follows the QUADPACK heuristic.  ``f`` must accept a numpy array.
    """
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    x = center + half * NODES
    y = _evaluate(f, x)
    resk = float(KRONROD_WEIGHTS @ y)
    resg = float(GAUSS_WEIGHTS @ y)
    resabs = float(KRONROD_WEIGHTS @ np.abs(y))
    resasc = float(KRONROD_WEIGHTS @ np.abs(y - 0.5 * resk))
    habs = abs(half)
    err = abs((resk - resg) * half)
    resasc *= habs
    resabs *= habs
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return resk * half, resg * half, err


def _tail_integrand(f, c, scale):
    def g(w):
        # w -> 0 maps to huge arguments; non-finite values are caught by the caller
        with np.errstate(over="ignore", divide="ignore"):
            return f(c + scale * (1.0 - w) / w) * (scale / (w * w))
    return g


def integrate(f: Callable, a: float, b: float, spec: Optional[QuadratureSpec] = None,
              points: Optional[Iterable[float]] = None,
              tail_scale: Optional[float] = None) -> QuadResult:
    """Adaptive integral of a vectorised integrand over ``[a, b]``.

    ``b`` may be ``math.inf``.  ``points`` are interior breakpoints (kinks,
    jumps) that become initial panel boundaries; points outside the range are
    ignored.  For semi-infinite ranges the tail map starts at the largest
    breakpoint and uses length scale ``tail_scale`` (default: that
    breakpoint, or 1 if it is zero).

    Raises NonConvergence when ``spec.max_subdivisions`` panels do not reach
    the tolerance and NonFinite when the integrand misbehaves at a node.
    """
    spec = spec or DEFAULT_SPEC
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise ValueError("integration limits must not be NaN")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = integrate(f, b, a, spec, points, tail_scale)
        return QuadResult(-res.value, res.error, res.panels)
    if math.isinf(a):
        raise ValueError("lower limit must be finite")

    hi_finite = b if math.isfinite(b) else None
    cuts = sorted({float(t) for t in (points or ())
                   if a < t and (hi_finite is None or t < hi_finite) and math.isfinite(t)})
    # segments: (integrand, lo, hi) in the integration variable
    segments = []
    knots = [a] + cuts + ([b] if hi_finite is not None else [])
    for lo, hi in zip(knots[:-1], knots[1:]):
        segments.append((f, lo, hi))
    if hi_finite is None:
        c = knots[-1]
        scale = tail_scale if tail_scale is not None else (c if c > 0 else 1.0)
        segments.append((_tail_integrand(f, c, scale), 0.0, 1.0))

    heap = []
    frozen_val = []
    frozen_err = 0.0
    seq = 0
    total = 0.0
    total_err = 0.0
    for seg_id, (g, lo, hi) in enumerate(segments):
        val, _, err = gk21(g, lo, hi)
        heapq.heappush(heap, (-err, seq, seg_id, lo, hi, val))
        seq += 1
        total += val
        total_err += err
    npanels = len(segments)

    def target():
        return max(spec.abs_tol, spec.rel_tol * abs(total))

    while total_err > target():
        if not heap:
            raise NonConvergence(
                "panels reached floating-point resolution before tolerance",
                value=total, error=total_err)
        if npanels >= spec.max_subdivisions:
            raise NonConvergence(
                f"subdivision budget {spec.max_subdivisions} exhausted",
                value=total, error=total_err)
        negerr, _, seg_id, lo, hi, val = heapq.heappop(heap)
        err = -negerr
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi) or (hi - lo) <= 4 * _EPS * max(abs(lo), abs(hi), _TINY):
            frozen_val.append(val)
            frozen_err += err
            continue
        g = segments[seg_id][0]
        v1, _, e1 = gk21(g, lo, mid)
        v2, _, e2 = gk21(g, mid, hi)
        heapq.heappush(heap, (-e1, seq, seg_id, lo, mid, v1))
        heapq.heappush(heap, (-e2, seq + 1, seg_id, mid, hi, v2))
        seq += 2
        npanels += 1
        total += v1 + v2 - val
        total_err += e1 + e2 - err
        if seq % 512 == 0:
            # refresh running sums to keep cancellation from drifting
            total = math.fsum([item[5] for item in heap] + frozen_val)
            total_err = math.fsum([-item[0] for item in heap]) + frozen_err

    # fixed summation order: by position in the integration range
    pieces = sorted(((item[2], item[3], item[5]) for item in heap))
    value = math.fsum([p[2] for p in pieces] + frozen_val)
    error = math.fsum([-item[0] for item in heap]) + frozen_err
    return QuadResult(value, error, npanels)


def geometric_breakpoints(lo: float, hi: float, ratio: float = 2.0) -> list[float]:
    """Points ``lo * ratio**k`` strictly inside (lo, hi); ``lo`` must be > 0."""
    out = []
    x = lo * ratio
    while x < hi:
        out.append(x)
        x *= ratio
    return out


@dataclass(frozen=True)
class TailEstimate:
    """Power-law exponent of samples near zero, ``f(t) ~ t**rho``."""
    rho: float
    band: float
    local_slopes: tuple = ()

    def contains(self, value: float, min_halfwidth: float = 0.0) -> bool:
        hw = max(self.band, min_halfwidth)
        return self.rho - hw <= value <= self.rho + hw


def dyadic_samples(f: Callable, t0: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``f`` at ``t0 * 2**-i`` for ``i = 0..count-1``."""
    t = t0 * np.exp2(-np.arange(count, dtype=float))
    return t, np.asarray(f(t), dtype=float)


def classify_tail(samples, t0: float, window: Optional[int] = None) -> TailEstimate:
    """Least-squares exponent of dyadic samples ``f(t0 * 2**-i)``.

    The slope of log f against log t is fitted over the last ``window``
    samples (default: the last 16, or all when fewer); ``band`` is the
    largest deviation of a consecutive-pair slope from the fit.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1 or y.size < 8:
        raise ValueError("classify_tail needs at least 8 dyadic samples")
    if np.any(y == 0.0):
        raise ZeroSamples("tail contains exact zeros")
    if np.any(y < 0.0) or not np.all(np.isfinite(y)):
        raise ValueError("tail samples must be positive and finite")
    if window is None:
        window = min(16, y.size)
    window = max(2, min(window, y.size))
    logt = math.log(t0) - math.log(2.0) * np.arange(y.size, dtype=float)
    logt = logt[-window:]
    logy = np.log(y[-window:])
    slope = float(np.polyfit(logt, logy, 1)[0])
    local = np.diff(logy) / np.diff(logt)
    band = float(np.max(np.abs(local - slope)))
    return TailEstimate(slope, band, tuple(float(s) for s in local))
