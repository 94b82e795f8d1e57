"""Exact radial solutions of -Delta_p u = F(|x|) and the barrier certificate.

For the model operator the decaying radial solution is

    u(r) = int_r^inf (s^{1-n} M(s))^{1/(p-1)} ds,   M(s) = int_0^s t^{n-1} F(t) dt,

which is evaluated here by nested adaptive quadrature.  On top of the
solver sit the decay metrics, the search over the barrier width delta and
the pointwise supersolution certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quad
from .barrier import BarrierParams, forcing_function, radial_moment
from .core import (Forcing, Nonlinearity, ProblemParams, RadialGrid,
                   RadialProfile)
from .criterion import classify_criterion, regularize
from .errors import (CriterionDiverges, CriterionInconclusive, DivergentMass,
                     GridTooCoarse, InvalidInput,
                     NonConvergence, SearchExhausted)
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate

__all__ = ["solve_radial", "MassFunction", "residual_check", "decay_metrics",
           "DecayMetrics", "SearchSpec", "Certificate", "delta_search",
           "delta_trajectory", "certify_supersolution", "SupersolutionCheck",
           "refined_check", "CERT_TOL"]

CERT_TOL = 1e-12
NEGLIGIBLE = 1e-300


def _as_forcing(F) -> Forcing:
    if isinstance(F, Forcing):
        return F
    if isinstance(F, RadialProfile):
        return Forcing.from_profile(F)
    if callable(F):
        return Forcing(F)
    raise InvalidInput("forcing must be a Forcing, a RadialProfile or a callable")


class MassFunction:
    """M(s) = int_0^s t^{n-1} F(t) dt, vectorised over s.

    M is tabulated by adaptive quadrature at ``knots``; between knots one
    21-point Kronrod panel on [knot, s] is used, falling back to adaptive
    quadrature wherever its Gauss/Kronrod discrepancy exceeds the tolerance.
    """

    def __init__(self, F: Forcing, n: int, knots, spec: QuadratureSpec):
        self.F = F
        self.n = n
        self.spec = spec
        self.knots = np.asarray(knots, dtype=float)
        vals = [0.0]
        for a, b in zip(self.knots[:-1], self.knots[1:]):
            vals.append(integrate(self._integrand, a, b, spec).value)
        self.values = np.cumsum(vals)

    def _integrand(self, t):
        return t ** (self.n - 1) * self.F(t)

    def total(self) -> float:
        """M(inf); DivergentMass if the tail integral does not converge."""
        last = float(self.knots[-1])
        if self.F.support is not None and self.F.support <= last:
            return float(self.values[-1])
        if self.F.tail_exponent is not None and self.F.tail_exponent <= self.n:
            raise DivergentMass(
                f"F ~ r^-{self.F.tail_exponent:g} has infinite mass in dimension {self.n}")
        try:
            tail = integrate(self._integrand, last, math.inf, self.spec)
        except NonConvergence as exc:
            raise DivergentMass(f"mass integral diverges or did not converge: {exc}") from None
        return float(self.values[-1] + tail.value)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        j = np.clip(np.searchsorted(self.knots, flat, side="right") - 1, 0, self.knots.size - 1)
        a = self.knots[j]
        base = self.values[j]
        half = 0.5 * (flat - a)
        x = a[:, None] + half[:, None] * (quad.NODES[None, :] + 1.0)
        y = self._integrand(x)
        k = (y @ quad.KRONROD_WEIGHTS) * half
        g = (y @ quad.GAUSS_WEIGHTS) * half
        out = base + k
        tol = np.maximum(self.spec.abs_tol, self.spec.rel_tol * np.abs(out))
        for i in np.nonzero(np.abs(k - g) > tol)[0]:
            lo, hi = float(a[i]), float(flat[i])
            pts = quad.geometric_breakpoints(lo, hi) if lo > 0 else ()
            out[i] = base[i] + integrate(self._integrand, lo, hi, self.spec, points=pts).value
        return out.reshape(s.shape)


def _knots(F: Forcing, grid: RadialGrid, extend: bool) -> np.ndarray:
    r_max = grid.r_max
    pts = set(grid.nodes.tolist())
    pts.update(b for b in F.breakpoints if 0 < b < r_max)
    if F.support is not None and 0 < F.support < r_max:
        pts.add(float(F.support))
    pts.update(F.scale * 2.0 ** k for k in range(-6, 8) if 0 < F.scale * 2.0 ** k < r_max)
    if extend:
        pts.update(r_max * 2.0 ** k for k in range(1, 61))
    return np.array(sorted(pts))


def _numerical_support(F: Forcing, grid: RadialGrid) -> Optional[float]:
    if F.support is not None:
        return F.support
    if F.nonincreasing and float(F(grid.r_max)) < NEGLIGIBLE:
        return grid.r_max
    return None


def solve_radial(F, params: ProblemParams, grid: RadialGrid,
                 spec: Optional[QuadratureSpec] = None) -> RadialProfile:
    """Decaying radial solution of the model problem at the grid nodes.

    Beyond a compact support inside the grid the tail is the exact
    fundamental-solution profile; otherwise the outer integral is continued
    to infinity through the tail map.
    """
    spec = spec or DEFAULT_SPEC
    params.require_supercritical()
    F = _as_forcing(F)
    n, p = params.n, params.p
    if F.is_zero:
        return RadialProfile(grid, np.zeros(len(grid)), name="u")
    support = _numerical_support(F, grid)
    compact = support is not None and support <= grid.r_max
    if compact and support != F.support:
        F = Forcing(F.func, F.breakpoints, support, F.tail_exponent, F.label,
                    F.nonincreasing, F.scale)
    knots = _knots(F, grid, extend=not compact)
    mass = MassFunction(F, n, knots, spec)
    m_inf = mass.total()
    if m_inf == 0.0:
        return RadialProfile(grid, np.zeros(len(grid)), name="u")

    e = 1.0 / (p - 1.0)

    def g(s):
        m = np.maximum(mass(s), 0.0)
        return (m * s ** (1.0 - n)) ** e

    r_max = grid.r_max
    inner = knots[knots <= r_max]
    pieces = np.array([integrate(g, a, b, spec).value for a, b in zip(inner[:-1], inner[1:])])
    if compact:
        tail = m_inf ** e * r_max ** (-params.kappa) / params.kappa
    else:
        try:
            tail = integrate(g, r_max, math.inf, spec,
                             points=quad.geometric_breakpoints(r_max, r_max * 2.0 ** 60)).value
        except NonConvergence as exc:
            raise DivergentMass(f"outer integral did not converge: {exc}") from None
    at_knots = tail + np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    idx = np.searchsorted(inner, grid.nodes)
    return RadialProfile(grid, at_knots[idx], name="u")


def _jump_cells(F: Forcing, nodes: np.ndarray, reach: int = 3) -> np.ndarray:
    """Mask of interior nodes whose stencil (``reach`` cells each side) meets a jump of F."""
    mask = np.zeros(nodes.size, dtype=bool)
    jumps = list(F.breakpoints)
    if F.support is not None and F.support > 0:
        jumps.append(F.support)
    for b in jumps:
        j = int(np.searchsorted(nodes, b))
        mask[max(j - reach, 0):j + reach + 1] = True
    return mask


def _midpoint_slopes(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """u'(m_i) at cell midpoints from the cubic through four surrounding nodes.

    Stencils are shifted to stay inside [0, r_max] at both ends.  No mirror
    node is used at the origin: u is smooth in r on [0, inf) but its even
    extension need not be (an r^3 term appears when F has a kink at x = 0).
    """
    rr, uu = r, u
    cells = r.size - 1
    start = np.clip(np.arange(cells) - 1, 0, rr.size - 4)
    idx = start[:, None] + np.arange(4)[None, :]
    x, y = rr[idx], uu[idx]
    m = 0.5 * (r[:-1] + r[1:])
    out = np.zeros(cells)
    for j in range(4):
        denom = np.ones(cells)
        numer = np.zeros(cells)
        for k in range(4):
            if k == j:
                continue
            denom *= x[:, j] - x[:, k]
            term = np.ones(cells)
            for l in range(4):
                if l != j and l != k:
                    term *= m - x[:, l]
            numer += term
        out += y[:, j] * numer / denom
    return out


def _flux_divergence(u: RadialProfile, params: ProblemParams):
    """-(r^{n-1}|u'|^{p-2}u')'/r^{n-1} averaged over dual cells.

    Fluxes live at cell midpoints m_i; the flux difference across the dual
    cell [m_{i-1}, m_i] is divided by its weighted volume (m_i^n - m_{i-1}^n)/n,
    which stays accurate at the origin where r^{1-n} blows up.  The result
    is a weighted cell average, so it is reported at the weighted centroid
    of the cell; this keeps the comparison with F second order.
    """
    r = u.grid.nodes
    n, p = params.n, params.p
    mid = 0.5 * (r[:-1] + r[1:])
    slope = _midpoint_slopes(r, u.values)
    flux = mid ** (n - 1) * np.sign(slope) * np.abs(slope) ** (p - 1.0)
    volume = (mid[1:] ** n - mid[:-1] ** n) / n
    centre = (mid[1:] ** (n + 1) - mid[:-1] ** (n + 1)) / (n + 1) / volume
    div = -(flux[1:] - flux[:-1]) / volume
    return centre, div


def _check_resolution(grid: RadialGrid):
    r = grid.nodes
    if r.size < 4:
        raise GridTooCoarse("residual check needs at least 4 nodes")
    lo = r[1]
    k = math.floor(math.log10(lo))
    while 10.0 ** (k + 1) <= grid.r_max:
        a, b = 10.0 ** k, 10.0 ** (k + 1)
        if a >= lo:
            count = int(np.count_nonzero((r >= a) & (r <= b)))
            if count < 4:
                raise GridTooCoarse(f"only {count} nodes in [{a:g}, {b:g}]; need 4 per decade")
        k += 1


def residual_check(u: RadialProfile, F, params: ProblemParams) -> float:
    """Max |finite-difference p-Laplacian of u - F| over interior nodes.

    Nodes within three cells of a jump of F are skipped.
    """
    _check_resolution(u.grid)
    F = _as_forcing(F)
    centre, div = _flux_divergence(u, params)
    mask = ~_jump_cells(F, u.grid.nodes)[1:-1]
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(div[mask] - F(centre[mask]))))


@dataclass(frozen=True)
class DecayMetrics:
    sup_u: float
    decay_coeff: float
    tail_limit: Optional[float]

    def as_dict(self):
        return {"sup_u": self.sup_u, "decay_coeff": self.decay_coeff,
                "tail_limit": self.tail_limit}


def decay_metrics(u: RadialProfile, params: ProblemParams, forcing=None,
                  spec: Optional[QuadratureSpec] = None) -> DecayMetrics:
    """sup u, max_r u(r) r^kappa and (given F) the limit M^{1/(p-1)}/kappa.

    The limit is also an upper bound for u(r) r^kappa at every r because M
    is non-decreasing.
    """
    kappa = params.kappa
    r = u.grid.nodes
    sup_u = float(np.max(u.values))
    weighted = u.values[1:] * r[1:] ** kappa
    decay = float(np.max(weighted)) if weighted.size else 0.0
    tail = None
    if forcing is not None:
        F = _as_forcing(forcing)
        m = radial_moment(F, params.n - 1.0, spec=spec) if not F.is_zero else 0.0
        tail = m ** (1.0 / (params.p - 1.0)) / kappa
    return DecayMetrics(sup_u, decay, tail)


# --------------------------------------------------------------------------
# supersolution certificate

@dataclass(frozen=True)
class SupersolutionCheck:
    passed: bool
    barrier_margin: float
    forcing_margin: float

    def as_dict(self):
        return {"pass": self.passed, "barrier_margin": self.barrier_margin,
                "forcing_margin": self.forcing_margin}


def certify_supersolution(u: RadialProfile, f: Nonlinearity, bp: BarrierParams,
                          tol: float = CERT_TOL) -> SupersolutionCheck:
    """Check u <= b and F = f(b) >= f(u) at every node of u's grid.

    Nodes where u exceeds eps (outside the domain of f) get forcing margin
    -inf.
    """
    r = u.grid.nodes
    b = bp.barrier(r)
    F = forcing_function(f, bp)(r)
    uu = np.maximum(u.values, 0.0)
    inside = uu <= f.eps
    fu = np.full_like(uu, math.inf)
    fu[inside] = f._eval(uu[inside])
    barrier_margin = float(np.min(b - u.values))
    forcing_margin = float(np.min(F - fu))
    passed = barrier_margin >= -tol and forcing_margin >= -tol
    return SupersolutionCheck(passed, barrier_margin, forcing_margin)


@dataclass(frozen=True)
class SearchSpec:
    delta0: float = 1.0
    shrink: float = 0.5
    max_iters: int = 60

    def __post_init__(self):
        if not (self.delta0 > 0 and 0 < self.shrink < 1 and self.max_iters >= 1):
            raise InvalidInput("search needs delta0 > 0, 0 < shrink < 1, max_iters >= 1")


@dataclass
class Certificate:
    delta1: float
    delta2: float
    delta: float
    barrier_margin: float
    forcing_margin: float
    sup_u: float
    decay_coeff: float
    tail_limit: float
    verdict: str
    eps: float
    kappa: float
    descriptor: str
    n: int
    p: float
    trajectory: list = field(default_factory=list)
    u: Optional[RadialProfile] = field(default=None, repr=False, compare=False)
    forcing: Optional[RadialProfile] = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    _FIELDS = ("delta1", "delta2", "delta", "barrier_margin", "forcing_margin", "sup_u",
               "decay_coeff", "tail_limit", "verdict", "eps", "kappa", "descriptor", "n", "p",
               "trajectory")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self._FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        return cls(**{k: data[k] for k in cls._FIELDS})


def _radial_state(f: Nonlinearity, params: ProblemParams, eps: float, delta: float,
                  grid: RadialGrid, spec):
    bp = BarrierParams(eps, delta, params)
    F = forcing_function(f, bp)
    u = solve_radial(F, params, grid, spec)
    metrics = decay_metrics(u, params, F, spec)
    return bp, F, u, metrics


def delta_trajectory(f: Nonlinearity, params: ProblemParams, deltas, eps: Optional[float] = None,
                     grid: Optional[RadialGrid] = None,
                     spec: Optional[QuadratureSpec] = None) -> list:
    """(delta, sup_u, decay_coeff, tail_limit) rows for the regularised f."""
    eps = f.eps if eps is None else eps
    grid = grid or RadialGrid.default()
    ft = regularize(f, params)
    rows = []
    for d in deltas:
        _, _, _, m = _radial_state(ft, params, eps, d, grid, spec)
        rows.append({"delta": d, "sup_u": m.sup_u, "decay_coeff": m.decay_coeff,
                     "tail_limit": m.tail_limit})
    return rows


def delta_search(f: Nonlinearity, params: ProblemParams, eps: Optional[float] = None,
                 search: Optional[SearchSpec] = None, grid: Optional[RadialGrid] = None,
                 spec: Optional[QuadratureSpec] = None) -> Certificate:
    """Shrink delta geometrically until the solution of -Delta_p u = f(b) sits under b.

    Two conditions are tracked at each delta: sup u <= eps 2^{-kappa} (which
    puts u under b inside B_delta) and u(r) r^kappa <= eps 2^{-kappa} delta^kappa
    (which does so outside).  The decay condition is tested on
    max(grid maximum, M^{1/(p-1)}/kappa), the latter bounding u r^kappa for
    every r including beyond the grid.
    """
    params.require_supercritical()
    search = search or SearchSpec()
    grid = grid or RadialGrid.default()
    eps = f.eps if eps is None else eps
    if eps > f.eps * (1 + 1e-15):
        raise InvalidInput(f"eps={eps:g} exceeds the domain of f")
    crit = classify_criterion(f, params, spec)
    if crit.verdict == "diverges":
        raise CriterionDiverges(
            f"int_0^eps f(t) t^(-1-sigma) dt diverges (sigma={crit.sigma:g}); "
            "no positive solution with inf u = 0 exists")
    if crit.verdict != "converges":
        raise CriterionInconclusive(
            f"critical integral could not be classified (exponent band {crit.band})")
    ft = regularize(f, params)
    kappa = params.kappa
    level = eps * 2.0 ** (-kappa)
    delta1 = delta2 = None
    trajectory = []
    delta = search.delta0
    for _ in range(search.max_iters):
        bp, F, u, m = _radial_state(ft, params, eps, delta, grid, spec)
        decay_bound = max(m.decay_coeff, m.tail_limit)
        ok_sup = m.sup_u <= level
        ok_decay = decay_bound <= level * delta ** kappa
        trajectory.append({"delta": delta, "sup_u": m.sup_u, "decay_coeff": m.decay_coeff,
                           "tail_limit": m.tail_limit, "sup_ok": ok_sup, "decay_ok": ok_decay})
        if ok_sup and delta1 is None:
            delta1 = delta
        if ok_decay and delta2 is None:
            delta2 = delta
        if ok_sup and ok_decay:
            check = certify_supersolution(u, ft, bp)
            verdict = "pass" if check.passed else "fail"
            return Certificate(
                delta1=delta1, delta2=delta2, delta=min(delta1, delta2),
                barrier_margin=check.barrier_margin, forcing_margin=check.forcing_margin,
                sup_u=m.sup_u, decay_coeff=m.decay_coeff, tail_limit=m.tail_limit,
                verdict=verdict, eps=eps, kappa=kappa, descriptor=ft.describe(),
                n=params.n, p=params.p, trajectory=trajectory, u=u,
                forcing=RadialProfile(grid, F(grid.nodes), name="F"))
        delta *= search.shrink
    raise SearchExhausted(f"no admissible delta after {search.max_iters} reductions "
                          f"(last delta={delta / search.shrink:g})")


def refined_check(cert: Certificate, f: Nonlinearity, factor: int = 10,
                  spec: Optional[QuadratureSpec] = None) -> SupersolutionCheck:
    """Re-solve on a grid with every cell split ``factor`` times and re-certify."""
    if cert.u is None:
        raise InvalidInput("certificate carries no profile")
    params = ProblemParams(cert.n, cert.p)
    ft = regularize(f, params)
    grid = cert.u.grid.refined(factor)
    bp = BarrierParams(cert.eps, cert.delta, params)
    u = solve_radial(forcing_function(ft, bp), params, grid, spec)
    return certify_supersolution(u, ft, bp)
