"""Barrier b(r) = eps (1 + r/delta)^{-kappa} and the forcing F = f(b).

Besides building F, this module evaluates the moments of F that make the
construction work: the mass integral in both the r and t variables (the
two must agree exactly), its upper bound through the critical integral,
and the weighted moment / dyadic sum chain that controls the dual norm of
the load functional.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import (Forcing, Nonlinearity, PowerLaw, ProblemParams, RadialGrid,
                   RadialProfile, Regularized, Tabulated, Zero, sphere_area)
from .criterion import DYADIC_LEVELS, classify_criterion
from .errors import DivergentMoment, InvalidInput, NonConvergence
from .quad import QuadratureSpec, integrate

__all__ = ["BarrierParams", "MomentReport", "barrier_profile", "forcing_function",
           "forcing_from_f", "moment_report", "dual_norm_estimate", "radial_moment",
           "dyadic_sum", "DYADIC_RANGE"]

DYADIC_RANGE = (-60, 60)


@dataclass(frozen=True)
class BarrierParams:
    eps: float
    delta: float
    params: ProblemParams

    def __post_init__(self):
        if not (self.eps > 0 and self.delta > 0 and math.isfinite(self.eps * self.delta)):
            raise InvalidInput("barrier needs eps > 0 and delta > 0")
        self.params.require_supercritical()

    @property
    def kappa(self) -> float:
        return self.params.kappa

    def barrier(self, r):
        return self.eps * (1.0 + np.asarray(r, dtype=float) / self.delta) ** (-self.kappa)

    def radius_of_level(self, t: float) -> float:
        """Radius where the barrier equals t (0 < t <= eps)."""
        return self.delta * ((self.eps / t) ** (1.0 / self.kappa) - 1.0)


def barrier_profile(bp: BarrierParams, grid: RadialGrid) -> RadialProfile:
    return RadialProfile(grid, bp.barrier(grid.nodes), name="b")


def _zero_exponent(f: Nonlinearity) -> Optional[float]:
    if isinstance(f, PowerLaw):
        return f.q
    if isinstance(f, Regularized):
        inner = _zero_exponent(f.base)
        if isinstance(f.base, Zero):
            return 1.0 + f.sigma
        if inner is not None:
            return min(inner, 1.0 + f.sigma)
    return None


def _zero_level(f: Nonlinearity) -> float:
    """Largest t with f = 0 on [0, t] (0 when f > 0 on (0, eps])."""
    if isinstance(f, Zero):
        return f.eps
    if isinstance(f, Tabulated):
        v = np.asarray(f.values)
        if v[0] == 0.0:
            k = int(np.argmax(v > 0)) if np.any(v > 0) else v.size
            return f.t[k - 1] if k < v.size else f.eps
    return 0.0


def forcing_function(f: Nonlinearity, bp: BarrierParams) -> Forcing:
    """F(r) = f(b(r)) as an analytic (vectorised) forcing density."""
    if f.eps < bp.eps * (1 - 1e-15):
        raise InvalidInput(f"f is only defined on [0, {f.eps:g}] but eps={bp.eps:g}")
    eps, kappa, delta = bp.eps, bp.kappa, bp.delta

    def func(r):
        b = eps * (1.0 + np.asarray(r, dtype=float) / delta) ** (-kappa)
        return f._eval(np.minimum(b, eps))

    breaks = tuple(sorted(bp.radius_of_level(t) for t in f.breakpoints if 0 < t < eps))
    q = _zero_exponent(f)
    level = _zero_level(f)
    support = None
    if level >= eps:
        support = 0.0
    elif level > 0:
        support = bp.radius_of_level(level)
    return Forcing(func, breakpoints=breaks, support=support,
                   tail_exponent=None if q is None else kappa * q,
                   label=f"{f.describe()}∘barrier(delta={delta:g})", scale=delta)


def forcing_from_f(f: Nonlinearity, bp: BarrierParams, grid: RadialGrid) -> RadialProfile:
    F = forcing_function(f, bp)
    return RadialProfile(grid, F(grid.nodes), name="F")


def radial_moment(F: Forcing, exponent: float, power: float = 1.0,
                  scale: Optional[float] = None,
                  spec: Optional[QuadratureSpec] = None) -> float:
    """int_0^inf r^exponent F(r)^power dr.

    Panels follow the geometric breakpoints ``scale * 2**k`` (default: the
    forcing's own length scale) plus the forcing's breakpoints.  Raises
    DivergentMoment when the known tail exponent makes the integral infinite
    or the quadrature cannot converge.
    """
    if F.is_zero:
        return 0.0
    if F.support is None and F.tail_exponent is not None:
        if F.tail_exponent * power - exponent <= 1.0:
            raise DivergentMoment(
                f"int r^{exponent:g} F^{power:g} diverges: F ~ r^-{F.tail_exponent:g}")

    def g(r):
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.asarray(F(r), dtype=float)
            out = r ** exponent * (val ** power if power != 1.0 else val)
        return np.where(val > 0, out, 0.0)

    upper = math.inf if F.support is None else F.support
    scale = F.scale if scale is None else scale
    pts = [scale * 2.0 ** k for k in range(-12, 41)]
    pts += list(F.breakpoints)
    try:
        res = integrate(g, 0.0, upper, spec, points=[x for x in pts if 0 < x < upper])
    except NonConvergence as exc:
        raise DivergentMoment(f"moment integral did not converge: {exc}") from None
    return res.value


def dyadic_sum(F: Forcing, params: ProblemParams, index_range=DYADIC_RANGE):
    """sum_i 2^{i(p/(p-1)+n)} F(2^i)^{p/(p-1)} and a flag for truncation.

    Returns ``(value, truncated, tail_bound)``; ``truncated`` is set when the
    terms at either end of the index range are not below 1e-16 of the sum.
    """
    pc = params.conjugate
    i = np.arange(index_range[0], index_range[1] + 1, dtype=float)
    vals = np.asarray(F(np.exp2(i)), dtype=float)
    terms = np.exp2(i * (pc + params.n)) * vals ** pc
    total = math.fsum(terms.tolist())
    if total == 0.0:
        return 0.0, False, 0.0
    tail_bound = 0.0
    last, prev = terms[-1], terms[-2]
    if last > 0:
        ratio = last / prev if prev > 0 else 1.0
        tail_bound = last * ratio / (1.0 - ratio) if ratio < 1 else math.inf
    truncated = bool(terms[0] > 1e-16 * total or terms[-1] > 1e-16 * total)
    return total, truncated, tail_bound


@dataclass(frozen=True)
class MomentReport:
    moment_n_minus_1: float
    moment_np: float
    cov_lhs: float
    cov_mid: float
    cov_bound: float
    dyadic_sum: float
    dyadic_truncated: bool
    dyadic_tail_bound: float
    criterion_value: float
    all_finite: bool

    @property
    def identity_gap(self) -> float:
        """Relative mismatch between the r- and t-variable forms of the mass."""
        scale = max(abs(self.cov_lhs), abs(self.cov_mid))
        return abs(self.cov_lhs - self.cov_mid) / scale if scale else 0.0

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MomentReport":
        return cls(**data)


def _cov_mid(f: Nonlinearity, bp: BarrierParams, rho: Optional[float], spec) -> float:
    """Mass integral after the change of variables t = b(r)."""
    n = bp.params.n
    eps = bp.eps
    beta = 1.0 / bp.kappa
    sigma = bp.params.sigma

    def g(t):
        x = t / eps
        # ((eps/t)^beta - 1)^{n-1} (eps/t)^{beta+1} written to avoid overflow
        return (1.0 - x ** beta) ** (n - 1) * x ** (-(sigma + 1.0)) * f._eval(t)

    t_min = eps * 2.0 ** -DYADIC_LEVELS
    pts = [eps * 2.0 ** -k for k in range(1, DYADIC_LEVELS)]
    pts += [t for t in f.breakpoints if t_min < t < eps]
    value = integrate(g, t_min, eps, spec, points=pts).value
    f_min = float(f._eval(np.asarray(t_min)))
    if f_min > 0 and rho is not None:
        # below t_min take f ~ t^rho and expand (1 - x^beta)^{n-1} binomially
        x_min = t_min / eps
        terms = [math.comb(n - 1, k) * (-1) ** k * x_min ** (k * beta - sigma)
                 / (rho - sigma + k * beta) for k in range(n)]
        value += eps * f_min * math.fsum(terms)
    return beta * bp.delta ** n / eps * value


def moment_report(f: Nonlinearity, bp: BarrierParams, spec: Optional[QuadratureSpec] = None,
                  forcing: Optional[Forcing] = None) -> MomentReport:
    params = bp.params
    n, p = params.n, params.p
    crit = classify_criterion(f, params, spec)
    if crit.verdict == "diverges":
        raise DivergentMoment("critical integral diverges, so the mass of F is infinite")
    F = forcing if forcing is not None else forcing_function(f, bp)
    cov_lhs = radial_moment(F, n - 1.0, scale=bp.delta, spec=spec)
    cov_mid = _cov_mid(f, bp, crit.exponent, spec)
    crit_value = crit.value if crit.converges else math.inf
    cov_bound = (p - 1.0) / (n - p) * bp.eps ** params.sigma * bp.delta ** n * crit_value
    m_np = radial_moment(F, n * (p - 1.0) / p, scale=bp.delta, spec=spec)
    dsum, truncated, tail = dyadic_sum(F, params)
    entries = (cov_lhs, cov_mid, cov_bound, m_np, dsum)
    return MomentReport(
        moment_n_minus_1=cov_lhs, moment_np=m_np, cov_lhs=cov_lhs, cov_mid=cov_mid,
        cov_bound=cov_bound, dyadic_sum=dsum, dyadic_truncated=truncated,
        dyadic_tail_bound=tail, criterion_value=crit_value,
        all_finite=all(math.isfinite(x) for x in entries))


def dual_norm_estimate(F: Forcing, params: ProblemParams, spec: Optional[QuadratureSpec] = None,
                       scale: Optional[float] = None) -> dict:
    """Holder-side integral, dyadic sum and weighted moment of a radial load.

    ``lebesgue_side`` is int_{R^n} |x|^{p'} F^{p'}(|x|) dx with p' = p/(p-1).
    The two ratios are the empirical constants of the chain
    lebesgue_side <= C dyadic_sum <= C C' moment_np^{p'}.
    """
    params.require_supercritical()
    n, p = params.n, params.p
    pc = params.conjugate
    if F.is_zero:
        return {"lebesgue_side": 0.0, "dyadic_sum": 0.0, "moment_np": 0.0,
                "lebesgue_over_dyadic": None, "dyadic_over_moment": None,
                "dyadic_truncated": False}
    m_np = radial_moment(F, n * (p - 1.0) / p, scale=scale, spec=spec)
    leb = sphere_area(n) * radial_moment(F, pc + n - 1.0, power=pc, scale=scale, spec=spec)
    dsum, truncated, _ = dyadic_sum(F, params)
    return {
        "lebesgue_side": leb,
        "dyadic_sum": dsum,
        "moment_np": m_np,
        "lebesgue_over_dyadic": leb / dsum if dsum > 0 else None,
        "dyadic_over_moment": dsum / m_np ** pc if m_np > 0 else None,
        "dyadic_truncated": truncated,
    }
