"""Ball measures and the Wolff potential of a radial density.

For mu(dy) = F(|y|) dy the measure of an off-centre ball B_r(x), |x| = d,
reduces to a one-dimensional integral over spheres |y| = t:

    mu(B_r(x)) = |S_1| int t^{n-1} F(t) frac(t) dt,

where frac(t) is the fraction of the sphere of radius t lying inside the
ball, a spherical cap whose half-angle theta* solves the law of cosines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import betainc

from .barrier import radial_moment
from .core import Forcing, ProblemParams, RadialGrid
from .errors import DivergentMass, InvalidInput
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate
from .radial import MassFunction, _as_forcing, solve_radial

__all__ = ["RadialMeasure", "cap_fraction", "ball_measure", "wolff_potential",
           "SplitBounds", "split_bounds", "center_identity_check", "wolff_sweep"]


def cap_fraction(n: int, t, d: float, r: float):
    """Fraction of the sphere |y| = t inside the ball of radius r centred at distance d.

    Vectorised over t.  Spheres inside the ball give 1, disjoint ones 0.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if d == 0.0:
        out[t <= r] = 1.0
        return out
    inside = t <= r - d
    out[inside] = 1.0
    part = (~inside) & (t > abs(d - r)) & (t < d + r)
    tp = t[part]
    c = np.clip((tp * tp + d * d - r * r) / (2.0 * tp * d), -1.0, 1.0)
    if n == 3:
        frac = 0.5 * (1.0 - c)
    elif n == 2:
        frac = np.arccos(c) / math.pi
    else:
        # cap of half-angle theta: 1/2 I_{sin^2 theta}((n-1)/2, 1/2) for theta <= pi/2
        s2 = np.clip(1.0 - c * c, 0.0, 1.0)
        half = 0.5 * betainc(0.5 * (n - 1), 0.5, s2)
        frac = np.where(c >= 0, half, 1.0 - half)
    out[part] = frac
    return out


@dataclass
class RadialMeasure:
    """mu(dy) = F(|y|) dy for a non-increasing radial density F."""
    density: Forcing
    params: ProblemParams
    spec: QuadratureSpec = DEFAULT_SPEC
    _mass: Optional[float] = field(default=None, init=False, repr=False)
    _cumulative: Optional[MassFunction] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.density = _as_forcing(self.density)
        if not self.density.nonincreasing:
            raise InvalidInput("radial measures need a non-increasing density")

    @property
    def total_mass(self) -> float:
        """|S_1| int_0^inf r^{n-1} F(r) dr; DivergentMass when infinite."""
        if self._mass is None:
            F = self.density
            m = 0.0 if F.is_zero else radial_moment(F, self.params.n - 1.0, spec=self.spec)
            self._mass = self.params.sphere_area * m
        return self._mass

    def _knots(self) -> np.ndarray:
        F = self.density
        pts = {0.0}
        pts.update(F.scale * 2.0 ** k for k in range(-30, 41))
        pts.update(b for b in F.breakpoints if b > 0)
        if F.support:
            pts.add(F.support)
        return np.array(sorted(pts))

    def centred(self, r):
        """mu(B_r(0)), vectorised over r."""
        if self._cumulative is None:
            self._cumulative = MassFunction(self.density, self.params.n, self._knots(), self.spec)
        r = np.asarray(r, dtype=float)
        if self.density.support is not None:
            r = np.minimum(r, self.density.support)
        return self.params.sphere_area * self._cumulative(r)


def total_mass(m: RadialMeasure) -> float:
    return m.total_mass


def ball_measure(m: RadialMeasure, d: float, r: float) -> float:
    """mu(B_r(x)) for a centre x at distance d from the origin."""
    if d < 0 or r <= 0:
        raise InvalidInput("ball measure needs d >= 0 and r > 0")
    F = m.density
    if F.is_zero:
        return 0.0
    if d == 0.0:
        return float(m.centred(r))
    n = m.params.n
    lo, hi = max(0.0, d - r), d + r
    if F.support is not None:
        hi = min(hi, F.support)
    if hi <= lo:
        return 0.0

    def g(t):
        return t ** (n - 1) * F(t) * cap_fraction(n, t, d, r)

    pts = [x for x in (abs(d - r), r - d, *F.breakpoints) if lo < x < hi]
    res = integrate(g, lo, hi, m.spec, points=sorted(set(pts)))
    return m.params.sphere_area * res.value


def _ball_measures(m: RadialMeasure, d: float, radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if d == 0.0:
        return m.centred(radii)
    flat = [ball_measure(m, d, float(r)) for r in radii.ravel()]
    return np.array(flat).reshape(radii.shape)


def _outer_points(m: RadialMeasure, d: float, lo: float, hi: float):
    F = m.density
    pts = {d / 2, d, 2 * d}
    for b in (*F.breakpoints, F.support):
        if b:
            pts.update((abs(d - b), d + b))
    pts.update(F.scale * 2.0 ** k for k in range(-20, 41))
    if d > 0:
        pts.update(d * 2.0 ** k for k in range(-20, 21))
    return sorted(x for x in pts if lo < x < hi)


def _wolff_piece(m: RadialMeasure, d: float, lo: float, hi: float) -> float:
    """int_lo^hi (mu(B_r(x)) / r^{n-p})^{1/(p-1)} dr / r."""
    if hi <= lo:
        return 0.0
    n, p = m.params.n, m.params.p
    e = 1.0 / (p - 1.0)
    kappa = m.params.kappa
    F = m.density
    mass = m.total_mass
    # beyond d + support the ball contains the whole support: closed form tail
    full = None if F.support is None else d + F.support
    tail = 0.0
    if full is not None and hi > full:
        a = max(lo, full)
        tail = mass ** e * (a ** -kappa - (0.0 if math.isinf(hi) else hi ** -kappa)) / kappa
        hi = a
        if hi <= lo:
            return tail

    def g(r):
        mu = np.maximum(_ball_measures(m, d, r), 0.0)
        return (mu * r ** (p - n)) ** e / r

    res = integrate(g, lo, hi, m.spec, points=_outer_points(m, d, lo, hi))
    return res.value + tail


def wolff_potential(m: RadialMeasure, d: float) -> float:
    """W(x) = int_0^inf (mu(B_r(x)) / r^{n-p})^{1/(p-1)} dr / r at |x| = d.

    For d > 0 this is the sum of the near (r < d/2) and far (r > d/2) parts
    returned by :func:`split_bounds`.
    """
    if d < 0:
        raise InvalidInput("distance must be non-negative")
    m.params.require_supercritical()
    if m.density.is_zero:
        return 0.0
    mass = m.total_mass  # raises DivergentMass first
    if not math.isfinite(mass):
        raise DivergentMass("total mass is infinite")
    if d == 0.0:
        return _wolff_piece(m, 0.0, 0.0, math.inf)
    return _wolff_piece(m, d, 0.0, d / 2) + _wolff_piece(m, d, d / 2, math.inf)


@dataclass(frozen=True)
class SplitBounds:
    d: float
    near: float
    far: float
    near_bound: float
    far_bound: float

    @property
    def total(self) -> float:
        return self.near + self.far

    @property
    def near_ratio(self) -> Optional[float]:
        return self.near / self.near_bound if self.near_bound > 0 else None

    @property
    def far_ratio(self) -> Optional[float]:
        return self.far / self.far_bound if self.far_bound > 0 else None

    def as_dict(self):
        return {"d": self.d, "W": self.total, "near": self.near, "far": self.far,
                "near_bound": self.near_bound, "far_bound": self.far_bound,
                "near_ratio": self.near_ratio, "far_ratio": self.far_ratio}


def split_bounds(m: RadialMeasure, d: float) -> SplitBounds:
    """Near and far parts of W split at r = d/2, with their reference bounds.

    near_bound = d^{p/(p-1)} F(d/2)^{1/(p-1)} and
    far_bound = d^{-kappa} mu(R^n)^{1/(p-1)}; the ratios to them are the
    empirical constants of the two estimates.
    """
    if d <= 0:
        raise InvalidInput("split needs d > 0")
    m.params.require_supercritical()
    p = m.params.p
    e = 1.0 / (p - 1.0)
    if m.density.is_zero:
        return SplitBounds(d, 0.0, 0.0, 0.0, 0.0)
    near = _wolff_piece(m, d, 0.0, d / 2)
    far = _wolff_piece(m, d, d / 2, math.inf)
    near_bound = d ** (p * e) * float(m.density(d / 2)) ** e
    far_bound = d ** (-m.params.kappa) * m.total_mass ** e
    return SplitBounds(d, near, far, near_bound, far_bound)


def wolff_sweep(m: RadialMeasure, distances) -> list:
    """Rows of (d, W, near, far) for a list of distances."""
    rows = []
    for d in distances:
        if d == 0:
            w = wolff_potential(m, 0.0)
            rows.append({"d": 0.0, "W": w, "near": 0.0, "far": w})
        else:
            s = split_bounds(m, float(d))
            rows.append({"d": float(d), "W": s.total, "near": s.near, "far": s.far})
    return rows


def center_identity_check(F, params: ProblemParams, grid: Optional[RadialGrid] = None,
                          spec: Optional[QuadratureSpec] = None) -> dict:
    """Compare u(0) from the radial solver with W(0) from the potential.

    For the model operator u(0) |S_1|^{1/(p-1)} = W(0) exactly; the two sides
    are computed along independent code paths.
    """
    spec = spec or DEFAULT_SPEC
    F = _as_forcing(F)
    grid = grid or RadialGrid.default()
    u0 = float(solve_radial(F, params, grid, spec).values[0])
    w0 = wolff_potential(RadialMeasure(F, params, spec), 0.0)
    scaled = u0 * params.sphere_area ** (1.0 / (params.p - 1.0))
    ratio = scaled / w0 if w0 > 0 else (1.0 if scaled == 0 else math.inf)
    return {"u0": u0, "w0": w0, "ratio": ratio}
