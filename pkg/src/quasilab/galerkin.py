"""Radial Galerkin solver for -div A(x, u, grad u) = F(|x|) on a truncated ball.

Piecewise-linear elements on [0, R] weighted by r^{n-1}, with the natural
condition at r = 0 and a prescribed value at r = R.  Variational operators
(model and scaled p-Laplacians) are solved by Newton's method on the
regularised energy

    J_eps(u) = int (a(r)/p) (eps^2 + |u'|^2)^{p/2} r^{n-1} dr - int F u r^{n-1} dr

with continuation in eps; general operators use damped Newton on the
residual.  The module also carries the numerical Hardy, weak Harnack and
sign checks applied to radial profiles.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .core import (Forcing, OperatorDescriptor, ProblemParams, RadialGrid,
                   RadialProfile, sphere_area)
from .errors import (DivergentNorm, InvalidInput, LambdaOutOfRange, LineSearchStall,
                     MeshInvalid, NoConvergence, NonConvergence, NonFinite)
from .quad import QuadratureSpec, integrate

__all__ = ["RadialFemSpace", "DiscreteSystem", "GalerkinSolution", "assemble",
           "solve_system", "coercivity_probe", "hardy_check", "HardyReport",
           "weak_harnack_check", "negative_part_check", "convergence_study",
           "parse_profile", "REG_SCHEDULE"]

REG_SCHEDULE = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)

_G4_X, _G4_W = np.polynomial.legendre.leggauss(4)


def _gauss_on(a: np.ndarray, b: np.ndarray):
    """4-point Gauss nodes and weights on each interval [a_i, b_i]."""
    half = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + half[:, None] * _G4_X[None, :]
    w = half[:, None] * _G4_W[None, :]
    return x, w


@dataclass(frozen=True)
class RadialFemSpace:
    """Hat functions on ``mesh``; the value at r = R is fixed to ``boundary_value``."""
    mesh: RadialGrid
    boundary_value: float = 0.0

    def __post_init__(self):
        if len(self.mesh) < 3:
            raise MeshInvalid("mesh needs at least two cells")
        if not math.isfinite(self.boundary_value):
            raise MeshInvalid("boundary value must be finite")

    @property
    def R(self) -> float:
        return self.mesh.r_max

    @property
    def dim(self) -> int:
        return len(self.mesh) - 1

    def full(self, coefficients: np.ndarray) -> np.ndarray:
        return np.concatenate([coefficients, [self.boundary_value]])


@dataclass
class DiscreteSystem:
    """Element data for the projected problem on a RadialFemSpace."""
    space: RadialFemSpace
    op: OperatorDescriptor
    forcing: Forcing
    params: ProblemParams
    h: np.ndarray
    weight: np.ndarray          # int_e a(r) r^{n-1} dr (variational operators)
    load: np.ndarray            # int F phi_i r^{n-1} dr for every node
    qx: np.ndarray              # element quadrature nodes (general operators)
    qw: np.ndarray              # matching weights times r^{n-1}

    @property
    def p(self) -> float:
        return self.params.p

    def slopes(self, full: np.ndarray) -> np.ndarray:
        return np.diff(full) / self.h

    def _flux(self, full: np.ndarray, reg: float) -> np.ndarray:
        """Element-integrated radial flux int_e A r^{n-1} dr."""
        g = self.slopes(full)
        if self.op.variational:
            return self.weight * (reg * reg + g * g) ** ((self.p - 2.0) / 2.0) * g
        r0 = self.space.mesh.nodes[:-1]
        lam = (self.qx - r0[:, None]) / self.h[:, None]
        s = full[:-1, None] * (1 - lam) + full[1:, None] * lam
        a = self.op.radial(self.qx, s, np.broadcast_to(g[:, None], self.qx.shape), self.params.n)
        return np.sum(a * self.qw, axis=1)

    def residual(self, coefficients: np.ndarray, reg: float = 0.0) -> np.ndarray:
        """(A u - F, phi_i) for every free basis function."""
        full = self.space.full(coefficients)
        flux = self._flux(full, reg) / self.h
        # phi_i' = -1/h on the element to the right of node i, +1/h on the left
        out = -self.load[:-1].copy()
        out -= flux[:self.space.dim]
        out[1:] += flux[:self.space.dim - 1]
        return out

    def energy(self, coefficients: np.ndarray, reg: float = 0.0) -> float:
        if not self.op.variational:
            raise InvalidInput("energy is only defined for variational operators")
        full = self.space.full(coefficients)
        g = self.slopes(full)
        p = self.p
        dens = (reg * reg + g * g) ** (p / 2.0)
        return float(math.fsum((self.weight * dens / p).tolist()) - math.fsum((self.load * full).tolist()))

    def jacobian_bands(self, coefficients: np.ndarray, reg: float = 0.0) -> np.ndarray:
        """Tridiagonal Jacobian of the residual in scipy's banded layout."""
        m = self.space.dim
        full = self.space.full(coefficients)
        if self.op.variational:
            g = self.slopes(full)
            p = self.p
            q = reg * reg + g * g
            if p == 2.0:
                slope = np.ones_like(g)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    slope = q ** ((p - 2.0) / 2.0) + (p - 2.0) * q ** ((p - 4.0) / 2.0) * g * g
                slope = np.where(q > 0, slope, 0.0)
            k = self.weight * slope / self.h ** 2
            bands = np.zeros((3, m))
            bands[1] = k[:m]
            bands[1, 1:] += k[:m - 1]
            bands[0, 1:] = -k[:m - 1]
            bands[2, :-1] = -k[:m - 1]
            return bands
        return self._fd_bands(coefficients)

    def _fd_bands(self, coefficients: np.ndarray) -> np.ndarray:
        m = self.space.dim
        base = self.residual(coefficients)
        bands = np.zeros((3, m))
        scale = np.maximum(1.0, np.abs(coefficients))
        for color in range(3):
            idx = np.arange(color, m, 3)
            step = 1e-7 * scale[idx]
            trial = coefficients.copy()
            trial[idx] += step
            delta = self.residual(trial) - base
            for j, s in zip(idx, step):
                bands[1, j] = delta[j] / s
                if j > 0:
                    bands[2, j - 1] = delta[j - 1] / s
                if j + 1 < m:
                    bands[0, j + 1] = delta[j + 1] / s
        return bands

    def stiffness(self) -> np.ndarray:
        """Dense weighted stiffness matrix over all nodes (p = 2 reference)."""
        N = len(self.space.mesh)
        K = np.zeros((N, N))
        k = self.weight / self.h ** 2
        i = np.arange(N - 1)
        K[i, i] += k
        K[i + 1, i + 1] += k
        K[i, i + 1] -= k
        K[i + 1, i] -= k
        return K


def _split_intervals(nodes: np.ndarray, cuts: Sequence[float]):
    """Element sub-intervals split at the given radii, with owning element index."""
    a, b, owner = [], [], []
    cuts = np.asarray(sorted(c for c in cuts if nodes[0] < c < nodes[-1]), dtype=float)
    for e in range(nodes.size - 1):
        lo, hi = nodes[e], nodes[e + 1]
        inner = cuts[(cuts > lo) & (cuts < hi)]
        pts = np.concatenate([[lo], inner, [hi]])
        a.extend(pts[:-1])
        b.extend(pts[1:])
        owner.extend([e] * (pts.size - 1))
    return np.array(a), np.array(b), np.array(owner)


def assemble(space: RadialFemSpace, op: OperatorDescriptor, F,
             params: ProblemParams) -> DiscreteSystem:
    """Element weights, load vector and quadrature data for the projected problem."""
    params.require_supercritical()
    if op.p != params.p:
        raise InvalidInput(f"operator exponent {op.p:g} differs from p={params.p:g}")
    F = F if isinstance(F, Forcing) else Forcing.from_profile(F) if isinstance(F, RadialProfile) else Forcing(F)
    nodes = space.mesh.nodes
    n = params.n
    h = np.diff(nodes)
    qx, qw = _gauss_on(nodes[:-1], nodes[1:])
    rw = qw * qx ** (n - 1)
    if op.kind == "model":
        weight = (nodes[1:] ** n - nodes[:-1] ** n) / n
    elif op.kind == "scaled":
        weight = np.sum(rw * np.asarray(op.coefficient(qx), dtype=float), axis=1)
    else:
        weight = np.sum(rw, axis=1)

    cuts = list(F.breakpoints)
    if F.support:
        cuts.append(F.support)
    a, b, owner = _split_intervals(nodes, cuts)
    x, w = _gauss_on(a, b)
    fw = w * x ** (n - 1) * np.asarray(F(x), dtype=float)
    lam = (x - nodes[owner][:, None]) / h[owner][:, None]
    load = np.zeros(nodes.size)
    np.add.at(load, owner, np.sum(fw * (1 - lam), axis=1))
    np.add.at(load, owner + 1, np.sum(fw * lam, axis=1))

    R = space.R
    tail = float(F(R)) * R ** n
    total = float(np.sum(load)) or 1.0
    if tail > 1e-12 * abs(total):
        warnings.warn(f"F(R) R^n = {tail:.3g} is not negligible; truncation at R={R:g} "
                      "is visible in the solution", RuntimeWarning, stacklevel=2)
    return DiscreteSystem(space, op, F, params, h, weight, load, qx, rw)


@dataclass
class GalerkinSolution:
    coefficients: np.ndarray
    energy: Optional[float]
    residual_norm: float
    iterations: int
    trace: list = field(default_factory=list)
    space: Optional[RadialFemSpace] = field(default=None, repr=False)

    def profile(self) -> RadialProfile:
        return RadialProfile(self.space.mesh, self.space.full(self.coefficients), name="u_h")

    def as_dict(self) -> dict:
        return {"energy": self.energy, "residual_norm": self.residual_norm,
                "iterations": self.iterations}


def _newton_direction(sys: DiscreteSystem, c: np.ndarray, reg: float, res: np.ndarray):
    bands = sys.jacobian_bands(c, reg)
    try:
        return solve_banded((1, 1), bands, -res)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NoConvergence(f"singular Jacobian: {exc}") from None


def _solve_variational(sys: DiscreteSystem, tol: float, max_iter: int) -> GalerkinSolution:
    c = np.zeros(sys.space.dim)
    trace = [{"stage": None, "iteration": 0, "energy": sys.energy(c, REG_SCHEDULE[0] if sys.p != 2 else 0.0),
              "residual": float(np.max(np.abs(sys.residual(c))))}]
    if sys.p == 2.0:
        c = _newton_direction(sys, c, 0.0, sys.residual(c))
        res = float(np.max(np.abs(sys.residual(c))))
        trace.append({"stage": 0.0, "iteration": 1, "energy": sys.energy(c), "residual": res})
        if res > tol:
            raise NoConvergence(f"linear solve left residual {res:.3g}", trace)
        return GalerkinSolution(c, sys.energy(c), res, 1, trace, sys.space)

    it = 0
    for reg in REG_SCHEDULE:
        last_stage = reg == REG_SCHEDULE[-1]
        J = sys.energy(c, reg)
        while True:
            res_vec = sys.residual(c, reg)
            res = float(np.max(np.abs(res_vec)))
            if res <= tol or (not last_stage and res <= max(tol, 1e-3 * reg)):
                break
            if it >= max_iter:
                raise NoConvergence(f"no convergence after {max_iter} Newton steps "
                                    f"(residual {res:.3g}, eps_reg={reg:g})", trace)
            d = _newton_direction(sys, c, reg, res_vec)
            slope = float(res_vec @ d)
            alpha = 1.0
            while True:
                trial = c + alpha * d
                J_trial = sys.energy(trial, reg)
                if J_trial <= J + 1e-4 * alpha * slope:
                    break
                if slope > -1e-15 * max(1.0, abs(J)):
                    # decrease below the resolution of J: accept a residual-reducing step
                    if float(np.max(np.abs(sys.residual(trial, reg)))) < res:
                        J_trial = min(J_trial, J)
                        break
                alpha *= 0.5
                if alpha < 1e-12:
                    raise LineSearchStall(f"line search stalled at residual {res:.3g}", trace)
            c, J = trial, J_trial
            it += 1
            trace.append({"stage": reg, "iteration": it, "energy": J,
                          "residual": float(np.max(np.abs(sys.residual(c, reg))))})
    res = float(np.max(np.abs(sys.residual(c))))
    if res > tol:
        raise NoConvergence(f"unregularised residual {res:.3g} above tolerance", trace)
    return GalerkinSolution(c, sys.energy(c), res, it, trace, sys.space)


def _solve_general(sys: DiscreteSystem, tol: float, max_iter: int) -> GalerkinSolution:
    c = np.zeros(sys.space.dim)
    res_vec = sys.residual(c)
    res = float(np.max(np.abs(res_vec)))
    trace = [{"iteration": 0, "residual": res}]
    it = 0
    while res > tol:
        if it >= max_iter:
            raise NoConvergence(f"damped Newton did not converge (residual {res:.3g})", trace)
        d = _newton_direction(sys, c, 0.0, res_vec)
        alpha = 1.0
        while True:
            trial = c + alpha * d
            trial_vec = sys.residual(trial)
            trial_res = float(np.max(np.abs(trial_vec)))
            if trial_res < (1 - 1e-4 * alpha) * res:
                break
            alpha *= 0.5
            if alpha < 1e-12:
                raise LineSearchStall(f"residual line search stalled at {res:.3g}", trace)
        c, res_vec, res = trial, trial_vec, trial_res
        it += 1
        trace.append({"iteration": it, "residual": res, "step": alpha})
    return GalerkinSolution(c, None, res, it, trace, sys.space)


def solve_system(sys: DiscreteSystem, tol: float = 1e-10, max_iter: int = 200) -> GalerkinSolution:
    """Solve (A u_h, phi_i) = (F, phi_i) for all free basis functions.

    ``residual_norm`` is the max-norm of the unregularised residual vector.
    For variational operators ``trace`` lists the regularised energy after
    every step; it is non-increasing because lowering eps can only lower
    J_eps at a fixed u.
    """
    if sys.op.variational:
        return _solve_variational(sys, tol, max_iter)
    return _solve_general(sys, tol, max_iter)


def _v_norm(sys: DiscreteSystem, full: np.ndarray) -> float:
    """(int |v'|^p r^{n-1} dr)^{1/p} for the piecewise-linear function."""
    g = sys.slopes(full)
    r = sys.space.mesh.nodes
    vol = (r[1:] ** sys.params.n - r[:-1] ** sys.params.n) / sys.params.n
    return float(np.sum(vol * np.abs(g) ** sys.p)) ** (1.0 / sys.p)


def coercivity_probe(sys: DiscreteSystem, scales: Sequence[float],
                     probe: Optional[np.ndarray] = None) -> list:
    """Rows (lambda, (A(lambda u), lambda u)/||lambda u||, ||lambda u||, c1 ||lambda u||^{p-1}).

    The probe defaults to the hat-sum 1 - r/R and has a zero boundary value.
    The pairing leaves out the load term.
    """
    nodes = sys.space.mesh.nodes
    full0 = (1.0 - nodes / nodes[-1]) if probe is None else np.asarray(probe, dtype=float)
    if full0.shape != nodes.shape or not np.any(full0):
        raise InvalidInput("probe needs one nonzero value per mesh node")
    rows = []
    for lam in scales:
        full = lam * full0
        flux = sys._flux(full, 0.0)
        pairing = float(np.sum(flux * sys.slopes(full)))
        norm = _v_norm(sys, full)
        rows.append({"lambda": float(lam), "ratio": pairing / norm if norm > 0 else 0.0,
                     "norm": norm, "bound": sys.params.c1 * norm ** (sys.p - 1.0)})
    return rows


# --------------------------------------------------------------------------
# checks on radial profiles

def _profile_quad(u: RadialProfile, fn: Callable, upper: Optional[float] = None) -> float:
    """int_0^upper fn(r, u(r), u'(r)) dr for a piecewise-linear profile (Gauss per cell)."""
    nodes = u.grid.nodes
    vals = u.values
    upper = nodes[-1] if upper is None else upper
    k = int(np.searchsorted(nodes, upper, side="left"))
    a = nodes[:k].copy()
    b = np.minimum(nodes[1:k + 1], upper)
    keep = b > a
    a, b = a[keep], b[keep]
    idx = np.nonzero(keep)[0]
    slope = np.diff(vals)[idx] / np.diff(nodes)[idx]
    x, w = _gauss_on(a, b)
    uu = vals[idx][:, None] + slope[:, None] * (x - nodes[idx][:, None])
    return float(np.sum(w * fn(x, uu, np.broadcast_to(slope[:, None], x.shape))))


@dataclass(frozen=True)
class HardyReport:
    lhs: float
    rhs: float
    ratio: float
    sharp_constant: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.sharp_constant * (1 + 1e-12)

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "sharp": self.sharp_constant, "holds": self.holds}


def hardy_check(u, params: ProblemParams, du: Optional[Callable] = None,
                points: Sequence[float] = (), extend_tail: bool = True,
                spec: Optional[QuadratureSpec] = None) -> HardyReport:
    """Compare int |u|^p |x|^{-p} dx with int |grad u|^p dx for a radial u.

    ``u`` is either a RadialProfile or a callable of r together with its
    derivative ``du``; callables are integrated over (0, inf).  A profile is
    continued past its last node by the decaying tail u(R) (R/r)^kappa when
    ``extend_tail`` is set, otherwise the integrals stop at R.
    """
    params.require_supercritical()
    n, p = params.n, params.p
    area = sphere_area(n)
    sharp = (p / (n - p)) ** p
    if isinstance(u, RadialProfile):
        lhs = _profile_quad(u, lambda r, v, dv: np.abs(v) ** p * r ** (n - 1 - p))
        rhs = _profile_quad(u, lambda r, v, dv: np.abs(dv) ** p * r ** (n - 1))
        if extend_tail:
            R, uR = u.grid.r_max, abs(float(u.values[-1]))
            kappa = params.kappa
            lhs += uR ** p * R ** (n - p) / kappa
            rhs += kappa ** (p - 1) * uR ** p * R ** (n - p)
    else:
        if du is None:
            raise InvalidInput("callable profiles need their derivative")
        pts = sorted(set([2.0 ** k for k in range(-40, 12)] + list(points)))
        try:
            lhs = integrate(lambda r: np.abs(u(r)) ** p * r ** (n - 1 - p), 0.0, math.inf,
                            spec, points=pts).value
            rhs = integrate(lambda r: np.abs(du(r)) ** p * r ** (n - 1), 0.0, math.inf,
                            spec, points=pts).value
        except (NonConvergence, NonFinite) as exc:
            raise DivergentNorm(f"Hardy integrals did not converge: {exc}") from None
    lhs, rhs = area * lhs, area * rhs
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise DivergentNorm("profile has infinite Hardy or gradient norm")
    if rhs == 0.0:
        if lhs > 0:
            raise DivergentNorm("non-zero profile with zero gradient norm")
        return HardyReport(0.0, 0.0, 0.0, sharp)
    return HardyReport(lhs, rhs, lhs / rhs, sharp)


def parse_profile(text: str):
    """Named test profiles: ``exp[:c]``, ``inv:a`` = (1+r)^-a, ``gauss``, ``bump[:k]``.

    Returns ``(u, du, breakpoints)``.
    """
    kind, _, arg = text.strip().partition(":")
    try:
        if kind == "exp":
            c = float(arg) if arg else 1.0
            return (lambda r: np.exp(-c * r), lambda r: -c * np.exp(-c * r), ())
        if kind == "inv":
            a = float(arg)
            return (lambda r: (1 + r) ** -a, lambda r: -a * (1 + r) ** (-a - 1), ())
        if kind == "gauss":
            return (lambda r: np.exp(-r * r), lambda r: -2 * r * np.exp(-r * r), ())
        if kind == "bump":
            k = float(arg) if arg else 2.0
            return (lambda r: np.where(r < 1, np.abs(1 - r * r) ** k, 0.0),
                    lambda r: np.where(r < 1, -2 * k * r * np.abs(1 - r * r) ** (k - 1), 0.0),
                    (1.0,))
    except ValueError:
        pass
    raise InvalidInput(f"unknown profile {text!r}")


def weak_harnack_check(u, params: ProblemParams, lam: float, radii: Sequence[float]) -> list:
    """Rows (r, lambda-mean of u over B_{2r}, u(r), ratio) for a non-increasing radial u.

    ``u`` is a RadialProfile or a callable of r.  The lambda-mean is
    ((1/|B_{2r}|) int_{B_{2r}} u^lambda dx)^{1/lambda}.
    """
    params.require_supercritical()
    sigma = params.sigma
    if not (0.0 < lam < sigma):
        raise LambdaOutOfRange(f"lambda must lie in (0, {sigma:g})")
    n = params.n
    rows = []
    for r in radii:
        r = float(r)
        if r <= 0:
            raise InvalidInput("radii must be positive")
        if isinstance(u, RadialProfile):
            integral = _profile_quad(u, lambda t, v, dv: np.maximum(v, 0.0) ** lam * t ** (n - 1),
                                     upper=2 * r)
            inf_r = float(u(r))
        else:
            integral = integrate(lambda t: np.maximum(np.asarray(u(t), dtype=float), 0.0) ** lam
                                 * t ** (n - 1), 0.0, 2 * r).value
            inf_r = float(u(r))
        mean = (n * integral / (2 * r) ** n) ** (1.0 / lam)
        ratio = mean / inf_r if inf_r > 0 else math.inf
        rows.append({"r": r, "mean": mean, "essinf": inf_r, "ratio": ratio})
    return rows


def negative_part_check(u, tol: float = 1e-12) -> dict:
    """Smallest nodal value and whether it is >= -tol."""
    if isinstance(u, GalerkinSolution):
        u = u.profile()
    vals = u.values if isinstance(u, RadialProfile) else np.asarray(u, dtype=float)
    low = float(np.min(vals))
    return {"min_value": low, "is_nonnegative": low >= -tol}


def convergence_study(params: ProblemParams, F, R: float, cells: Sequence[int],
                      op: Optional[OperatorDescriptor] = None, tol: float = 1e-10) -> dict:
    """Galerkin solutions on uniform meshes against the exact radial solution.

    The boundary value at R is the exact solution's value there, so the only
    error left is the discretisation error.
    """
    from .radial import solve_radial

    op = op or OperatorDescriptor.model(params.p)
    F = F if isinstance(F, Forcing) else Forcing.parse(F)
    rows = []
    for m in cells:
        mesh = RadialGrid.uniform(R, int(m))
        exact = solve_radial(F, params, mesh).values
        space = RadialFemSpace(mesh, float(exact[-1]))
        sol = solve_system(assemble(space, op, F, params), tol=tol)
        full = space.full(sol.coefficients)
        rows.append({"cells": int(m), "h": R / m,
                     "max_error": float(np.max(np.abs(full - exact))),
                     "energy": sol.energy, "residual_norm": sol.residual_norm,
                     "iterations": sol.iterations,
                     "min_value": float(np.min(full))})
    for prev, cur in zip(rows[:-1], rows[1:]):
        cur["reduction"] = prev["max_error"] / cur["max_error"] if cur["max_error"] > 0 else math.inf
    return {"n": params.n, "p": params.p, "R": R, "forcing": F.label, "rows": rows,
            "final_error": rows[-1]["max_error"] if rows else None}
