"""Critical exponent and the convergence test for int_0^eps f(t) t^{-1-sigma} dt.

Convergence of this integral is exactly what separates the existence of a
positive decaying supersolution from the triviality of every solution.
Power and power-log families are classified in closed form; tables and
user callables go through a dyadic estimate of the exponent of f at zero,
which refuses to decide when the estimate cannot be separated from sigma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (Custom, Nonlinearity, PowerLaw, PowerLog, ProblemParams,
                   Regularized, Tabulated, Zero)
from .errors import ZeroSamples
from .quad import QuadratureSpec, classify_tail, integrate

__all__ = ["CriterionReport", "critical_exponent", "classify_criterion",
           "regularize", "criterion_integral", "BAND_HALFWIDTH", "DYADIC_LEVELS"]

BAND_HALFWIDTH = 0.05
# t_min = eps * 2**-52
DYADIC_LEVELS = 52

CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CriterionReport:
    sigma: float
    verdict: str
    method: str
    value: Optional[float] = None
    error: Optional[float] = None
    band: Optional[tuple] = None
    exponent: Optional[float] = None
    eps: Optional[float] = None
    descriptor: str = ""

    @property
    def converges(self) -> bool:
        return self.verdict == CONVERGES

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "sigma": self.sigma, "method": self.method,
               "eps": self.eps, "f": self.descriptor}
        if self.value is not None:
            out["value"] = self.value
            out["error"] = self.error
        if self.band is not None:
            out["band"] = list(self.band)
        if self.exponent is not None:
            out["exponent"] = self.exponent
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CriterionReport":
        band = data.get("band")
        return cls(sigma=data["sigma"], verdict=data["verdict"], method=data["method"],
                   value=data.get("value"), error=data.get("error"),
                   band=tuple(band) if band is not None else None,
                   exponent=data.get("exponent"), eps=data.get("eps"),
                   descriptor=data.get("f", ""))


def critical_exponent(params: ProblemParams) -> float:
    """sigma = n(p-1)/(n-p); UnsupportedRegime when n <= p."""
    return params.require_supercritical().sigma


def regularize(f: Nonlinearity, params: ProblemParams) -> Nonlinearity:
    """max{f(t), t^{1+sigma}}, positive on (0, eps] with the same verdict."""
    sigma = critical_exponent(params)
    if isinstance(f, Regularized) and f.sigma == sigma:
        return f
    return Regularized(f, sigma)


def _numeric_integral(f: Nonlinearity, sigma: float, spec, rho: Optional[float]):
    """int_{t_min}^{eps} f t^{-1-sigma} dt plus a power-law remainder below t_min."""
    eps = f.eps
    t_min = eps * 2.0 ** -DYADIC_LEVELS
    points = [eps * 2.0 ** -k for k in range(1, DYADIC_LEVELS)]
    points += [b for b in f.breakpoints if t_min < b < eps]

    def g(t):
        return f._eval(t) * t ** (-1.0 - sigma)

    res = integrate(g, t_min, eps, spec, points=points)
    remainder = 0.0
    f_min = float(f._eval(np.asarray(t_min)))
    if f_min > 0.0 and rho is not None:
        remainder = f_min * t_min ** (-sigma) / (rho - sigma)
    return res.value + remainder, res.error + abs(remainder) * 1e-3


def _tail(f: Nonlinearity):
    t = f.eps * np.exp2(-np.arange(DYADIC_LEVELS + 1, dtype=float))
    return t, np.asarray(f._eval(t), dtype=float)


def _classify_numeric(f: Nonlinearity, sigma: float, spec, base_report=None) -> CriterionReport:
    t, y = _tail(f)
    common = dict(sigma=sigma, method="dyadic-numeric", eps=f.eps, descriptor=f.describe())
    try:
        est = classify_tail(y, f.eps)
    except ZeroSamples:
        if y[-1] == 0.0:
            # f vanishes on a neighbourhood of 0 (it is non-decreasing)
            value, err = _numeric_integral(f, sigma, spec, None)
            return CriterionReport(verdict=CONVERGES, value=value, error=err, **common)
        raise
    hw = max(est.band, BAND_HALFWIDTH)
    if est.rho - hw > sigma:
        value, err = _numeric_integral(f, sigma, spec, est.rho)
        return CriterionReport(verdict=CONVERGES, value=value, error=err,
                               band=(est.rho - hw, est.rho + hw), exponent=est.rho, **common)
    if est.rho + hw < sigma:
        return CriterionReport(verdict=DIVERGES, band=(est.rho - hw, est.rho + hw),
                               exponent=est.rho, **common)
    return CriterionReport(verdict=INCONCLUSIVE, band=(est.rho - hw, est.rho + hw),
                           exponent=est.rho, **common)


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def classify_criterion(f: Nonlinearity, params: ProblemParams,
                       spec: Optional[QuadratureSpec] = None) -> CriterionReport:
    sigma = critical_exponent(params)
    eps = f.eps
    common = dict(sigma=sigma, eps=eps, descriptor=f.describe())

    if isinstance(f, Zero):
        return CriterionReport(verdict=CONVERGES, method="analytic", value=0.0, error=0.0, **common)

    if isinstance(f, PowerLaw):
        if f.q > sigma and not _same(f.q, sigma):
            d = f.q - sigma
            return CriterionReport(verdict=CONVERGES, method="analytic",
                                   value=f.coeff * eps ** d / d, error=0.0,
                                   exponent=f.q, **common)
        return CriterionReport(verdict=DIVERGES, method="analytic", exponent=f.q, **common)

    if isinstance(f, PowerLog):
        if _same(f.q, sigma):
            if f.alpha > 1:
                L = abs(math.log(eps))
                return CriterionReport(verdict=CONVERGES, method="analytic",
                                       value=f.coeff * L ** (1.0 - f.alpha) / (f.alpha - 1.0),
                                       error=0.0, exponent=f.q, **common)
            return CriterionReport(verdict=DIVERGES, method="analytic", exponent=f.q, **common)
        if f.q > sigma:
            value, err = _numeric_integral(f, sigma, spec, f.q)
            return CriterionReport(verdict=CONVERGES, method="analytic", value=value,
                                   error=err, exponent=f.q, **common)
        return CriterionReport(verdict=DIVERGES, method="analytic", exponent=f.q, **common)

    if isinstance(f, Regularized):
        base = classify_criterion(f.base, params, spec)
        if not base.converges:
            return CriterionReport(verdict=base.verdict, method=base.method, band=base.band,
                                   exponent=base.exponent, **common)
        if _same(f.sigma, sigma):
            # max{f, g} = f + max{0, g - f}; the extra integrand is bounded by 1
            base_f = f.base

            def extra(t):
                return np.maximum(0.0, 1.0 - base_f._eval(t) * t ** (-1.0 - sigma))

            pts = [eps * 2.0 ** -k for k in range(1, 8)] + list(base_f.breakpoints)
            res = integrate(extra, 0.0, eps, spec, points=[x for x in pts if 0 < x < eps])
            return CriterionReport(verdict=CONVERGES, method=base.method,
                                   value=base.value + res.value, error=base.error + res.error,
                                   exponent=base.exponent, **common)
        return _classify_numeric(f, sigma, spec)

    if isinstance(f, (Tabulated, Custom)):
        return _classify_numeric(f, sigma, spec)

    return _classify_numeric(f, sigma, spec)


def criterion_integral(f: Nonlinearity, params: ProblemParams,
                       spec: Optional[QuadratureSpec] = None) -> float:
    """Value of the critical integral; inf when it diverges."""
    rep = classify_criterion(f, params, spec)
    if rep.converges:
        return rep.value
    if rep.verdict == DIVERGES:
        return math.inf
    return math.nan
