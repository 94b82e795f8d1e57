"""Domain types: problem parameters, operators, nonlinearities, radial grids.

Vectors follow the numpy convention ``(..., n)``; every evaluation routine
accepts batches along the leading axes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .errors import (DomainError, InvalidInput, MonotonicityViolation,
                     UnsupportedRegime)

__all__ = [
    "ProblemParams", "sphere_area", "ball_volume",
    "OperatorDescriptor", "eval_operator", "SamplingPlan", "StructureReport",
    "check_structure", "parse_operator",
    "Nonlinearity", "PowerLaw", "PowerLog", "Tabulated", "Custom", "Zero",
    "Regularized", "eval_nonlinearity", "parse_nonlinearity",
    "RadialGrid", "RadialProfile", "Forcing",
]


def sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int, r: float = 1.0) -> float:
    return sphere_area(n) * r ** n / n


@dataclass(frozen=True)
class ProblemParams:
    n: int
    p: float
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInput(f"dimension n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.p) and self.p > 1):
            raise InvalidInput(f"exponent p must be > 1, got {self.p}")
        if not (0 < self.c1 <= self.c2 and math.isfinite(self.c2)):
            raise InvalidInput("ellipticity constants need 0 < c1 <= c2")

    @property
    def supercritical(self) -> bool:
        return self.n > self.p

    def require_supercritical(self) -> "ProblemParams":
        if not self.supercritical:
            raise UnsupportedRegime(
                f"n={self.n} <= p={self.p}: non-negative supersolutions of "
                "-div A >= 0 are constant, no decaying positive solution exists")
        return self

    @property
    def kappa(self) -> float:
        """Decay exponent (n-p)/(p-1) of the fundamental solution."""
        self.require_supercritical()
        return (self.n - self.p) / (self.p - 1.0)

    @property
    def sigma(self) -> float:
        """Critical exponent n(p-1)/(n-p)."""
        self.require_supercritical()
        return self.n * (self.p - 1.0) / (self.n - self.p)

    @property
    def conjugate(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def sphere_area(self) -> float:
        return sphere_area(self.n)


# --------------------------------------------------------------------------
# operators A(x, s, xi)

def _plap_flux(xi, p):
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(norm > 0, norm ** (p - 2.0), 0.0)
    return w * xi


@dataclass(frozen=True)
class OperatorDescriptor:
    """Vector field A(x, s, xi).

    ``kind`` is ``"model"`` (|xi|^{p-2} xi), ``"scaled"`` (a(|x|) |xi|^{p-2} xi)
    or ``"custom"`` (``rule(x, s, xi)`` evaluated as given, batched).
    """
    kind: str
    p: float
    coefficient: Optional[Callable] = None
    rule: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("model", "scaled", "custom"):
            raise InvalidInput(f"unknown operator kind {self.kind!r}")
        if self.kind == "scaled" and self.coefficient is None:
            raise InvalidInput("scaled operator needs a coefficient function")
        if self.kind == "custom" and self.rule is None:
            raise InvalidInput("custom operator needs an evaluation rule")

    @classmethod
    def model(cls, p: float) -> "OperatorDescriptor":
        return cls("model", p, label="model")

    @classmethod
    def scaled(cls, p: float, coefficient: Callable, label: str = "scaled") -> "OperatorDescriptor":
        return cls("scaled", p, coefficient=coefficient, label=label)

    @classmethod
    def custom(cls, p: float, rule: Callable, label: str = "custom") -> "OperatorDescriptor":
        return cls("custom", p, rule=rule, label=label)

    @property
    def variational(self) -> bool:
        return self.kind in ("model", "scaled")

    def __call__(self, x, s, xi):
        return eval_operator(self, x, s, xi)

    def radial(self, r, s, du, n: int):
        """Radial component of A at (r e_1, s, du e_1); batched over r."""
        r = np.asarray(r, dtype=float)
        du = np.asarray(du, dtype=float)
        if self.kind == "model":
            return _signed_pow(du, self.p - 1.0)
        if self.kind == "scaled":
            return self.coefficient(r) * _signed_pow(du, self.p - 1.0)
        shape = np.broadcast(r, s, du).shape
        x = np.zeros(shape + (n,))
        xi = np.zeros(shape + (n,))
        x[..., 0] = r
        xi[..., 0] = du
        out = np.asarray(self.rule(x, np.broadcast_to(s, shape), xi), dtype=float)
        return out[..., 0]

    def radial_slope(self, r, s, du, n: int, h: float = 1e-7):
        """d/d(du) of the radial flux; exact for model/scaled families."""
        du = np.asarray(du, dtype=float)
        if self.kind in ("model", "scaled"):
            with np.errstate(divide="ignore"):
                d = (self.p - 1.0) * np.abs(du) ** (self.p - 2.0)
            if self.kind == "scaled":
                d = d * self.coefficient(np.asarray(r, dtype=float))
            return d
        step = h * np.maximum(1.0, np.abs(du))
        return (self.radial(r, s, du + step, n) - self.radial(r, s, du - step, n)) / (2 * step)


def _signed_pow(x, e):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** e


def eval_operator(op: OperatorDescriptor, x, s, xi):
    """A(x, s, xi) for batched points; A(., ., 0) = 0 for the shipped families."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    s = np.asarray(s, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi)) and np.all(np.isfinite(s))):
        raise InvalidInput("operator arguments must be finite")
    if op.kind == "model":
        return _plap_flux(xi, op.p)
    if op.kind == "scaled":
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return np.asarray(op.coefficient(r), dtype=float) * _plap_flux(xi, op.p)
    return np.asarray(op.rule(x, s, xi), dtype=float)


@dataclass(frozen=True)
class SamplingPlan:
    count: int = 10_000
    seed: int = 0
    x_radius: float = 10.0
    s_range: float = 10.0
    log10_magnitude: tuple = (-3.0, 3.0)


@dataclass(frozen=True)
class StructureReport:
    monotonicity_margin: float
    coercivity_margin: float
    boundedness_margin: float
    passed: bool
    samples: int
    tol: float

    def as_dict(self):
        return {
            "monotonicity_margin": self.monotonicity_margin,
            "coercivity_margin": self.coercivity_margin,
            "boundedness_margin": self.boundedness_margin,
            "passed": self.passed,
            "samples": self.samples,
            "tol": self.tol,
        }


def check_structure(op: OperatorDescriptor, params: ProblemParams,
                    samples: Union[int, SamplingPlan] = 10_000, tol: float = 1e-12) -> StructureReport:
    """Sample the monotonicity, coercivity and growth hypotheses on A.

    Margins are normalised so they are scale free:

    * monotonicity: (A(z)-A(xi)).(z-xi) / ((|A(z)|+|A(xi)|) |z-xi|)
    * coercivity:   xi.A(xi)/|xi|^p - c1
    * boundedness:  c2 - |A(xi)|/|xi|^{p-1}

    The report passes when every worst-case margin is >= -tol.
    """
    plan = samples if isinstance(samples, SamplingPlan) else SamplingPlan(count=int(samples))
    rng = np.random.default_rng(plan.seed)
    n, p = params.n, params.p
    m = plan.count

    def rand_vectors():
        direction = rng.standard_normal((m, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        lo, hi = plan.log10_magnitude
        mag = 10.0 ** rng.uniform(lo, hi, size=(m, 1))
        return direction * mag

    x = rng.uniform(-plan.x_radius, plan.x_radius, size=(m, n))
    s = rng.uniform(-plan.s_range, plan.s_range, size=m)
    zeta = rand_vectors()
    xi = rand_vectors()
    # a quarter of the pairs are close together to probe local monotonicity
    k = m // 4
    xi[:k] = zeta[:k] * (1.0 + 10.0 ** rng.uniform(-6, -1, size=(k, 1)))

    a_zeta = eval_operator(op, x, s, zeta)
    a_xi = eval_operator(op, x, s, xi)

    diff = zeta - xi
    mono = np.einsum("ij,ij->i", a_zeta - a_xi, diff)
    scale = (np.linalg.norm(a_zeta, axis=1) + np.linalg.norm(a_xi, axis=1)) * np.linalg.norm(diff, axis=1)
    mono_rel = np.where(scale > 0, mono / np.where(scale > 0, scale, 1.0), 0.0)

    xnorm = np.linalg.norm(xi, axis=1)
    coer = np.einsum("ij,ij->i", xi, a_xi) / xnorm ** p - params.c1
    bound = params.c2 - np.linalg.norm(a_xi, axis=1) / xnorm ** (p - 1.0)

    zero_val = eval_operator(op, x[:1], s[:1], np.zeros((1, n)))
    zero_ok = bool(np.all(zero_val == 0.0))

    mono_m = float(np.min(mono_rel))
    coer_m = float(np.min(coer))
    bound_m = float(np.min(bound))
    passed = zero_ok and min(mono_m, coer_m, bound_m) >= -tol
    return StructureReport(mono_m, coer_m, bound_m, passed, m, tol)


def _parse_coefficient(spec: str):
    """``<c>`` for a constant or ``sin2:<A>`` for 1 + A sin^2 r."""
    if spec.startswith("sin2:"):
        amp = float(spec[5:])
        return (lambda r: 1.0 + amp * np.sin(r) ** 2), f"scaled:sin2:{amp:g}"
    c = float(spec)
    return (lambda r: np.full_like(np.asarray(r, dtype=float), c)), f"scaled:{c:g}"


def parse_operator(text: str, p: float) -> OperatorDescriptor:
    text = text.strip()
    if text == "model":
        return OperatorDescriptor.model(p)
    if text.startswith("scaled:"):
        coeff, label = _parse_coefficient(text[7:])
        return OperatorDescriptor.scaled(p, coeff, label)
    raise InvalidInput(f"unknown operator descriptor {text!r}")


# --------------------------------------------------------------------------
# nonlinearities f on [0, eps]

class Nonlinearity:
    """Non-negative, non-decreasing f on [0, eps]; callable on arrays."""

    eps: float
    family = "abstract"

    @property
    def breakpoints(self) -> tuple:
        return ()

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > self.eps):
            raise DomainError(f"argument outside [0, {self.eps}]")
        out = self._eval(arr)
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> str:
        raise NotImplementedError


def _check_eps(eps):
    if not (math.isfinite(eps) and eps > 0):
        raise InvalidInput(f"eps must be a positive real, got {eps}")


@dataclass(frozen=True)
class PowerLaw(Nonlinearity):
    q: float
    eps: float = 1.0
    coeff: float = 1.0
    family = "power"

    def __post_init__(self):
        _check_eps(self.eps)
        if not (self.q > 0 and self.coeff > 0):
            raise InvalidInput("power law needs q > 0 and a positive coefficient")

    def _eval(self, t):
        return self.coeff * t ** self.q

    def describe(self):
        return f"power:{self.q:g}" if self.coeff == 1.0 else f"power:{self.q:g}*{self.coeff:g}"


@dataclass(frozen=True)
class PowerLog(Nonlinearity):
    """t^q |ln t|^{-alpha}, defined for t <= min(eps, 1/e)."""
    q: float
    alpha: float
    eps: float = math.exp(-1.0)
    coeff: float = 1.0
    family = "powerlog"

    def __post_init__(self):
        _check_eps(self.eps)
        if self.eps > math.exp(-1.0) * (1 + 1e-15):
            raise InvalidInput("powerlog requires eps <= 1/e so that |ln t| >= 1")
        if not (self.q > 0 and self.coeff > 0):
            raise InvalidInput("powerlog needs q > 0")
        # derivative sign is that of q|ln t| + alpha, smallest at t = eps
        if self.q * abs(math.log(self.eps)) + self.alpha < 0:
            raise MonotonicityViolation("powerlog is not non-decreasing on [0, eps]")

    def _eval(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = t ** self.q * np.abs(np.log(t)) ** (-self.alpha)
        return self.coeff * np.where(t > 0, v, 0.0)

    def describe(self):
        return f"powerlog:{self.q:g},{self.alpha:g}"


@dataclass(frozen=True)
class Zero(Nonlinearity):
    eps: float = 1.0
    family = "zero"

    def __post_init__(self):
        _check_eps(self.eps)

    def _eval(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def describe(self):
        return "zero"


@dataclass(frozen=True, eq=False)
class Tabulated(Nonlinearity):
    """Monotone piecewise-linear interpolation of a sample table.

    A table whose first abscissa is positive is extended by the point (0, 0).
    """
    t: tuple
    values: tuple
    source: str = ""
    family = "table"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InvalidInput("table needs two equally long columns with >= 2 rows")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InvalidInput("table entries must be finite")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise InvalidInput("table abscissae must be non-negative and strictly increasing")
        if np.any(v < 0):
            raise MonotonicityViolation("table values must be non-negative")
        if np.any(np.diff(v) < 0):
            i = int(np.argmax(np.diff(v) < 0))
            raise MonotonicityViolation(
                f"table is decreasing between t={t[i]:g} and t={t[i + 1]:g}")
        if t[0] > 0:
            t = np.concatenate([[0.0], t])
            v = np.concatenate([[0.0], v])
        object.__setattr__(self, "t", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def eps(self):
        return self.t[-1]

    @property
    def breakpoints(self):
        return self.t[1:-1]

    def _eval(self, t):
        return np.interp(t, self.t, self.values)

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3:
            raise InvalidInput(f"{path}: expected header row and >= 2 data rows")
        try:
            data = [(float(a), float(b)) for a, b, *_ in rows[1:] if a.strip()]
        except ValueError as exc:
            raise InvalidInput(f"{path}: {exc}") from None
        t, v = zip(*data)
        return cls(t, v, source=str(path))

    def describe(self):
        return f"table:{self.source}" if self.source else "table"


@dataclass(frozen=True, eq=False)
class Custom(Nonlinearity):
    """User callable, checked for sign and monotonicity on a sample grid."""
    rule: Callable
    eps: float = 1.0
    label: str = "custom"
    check_points: int = 2001
    family = "custom"

    def __post_init__(self):
        _check_eps(self.eps)
        t = np.unique(np.concatenate([
            np.linspace(0.0, self.eps, self.check_points),
            self.eps * np.exp2(-np.arange(1, 60, dtype=float))]))
        v = np.asarray(self.rule(t), dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise MonotonicityViolation(f"{self.label}: f must be finite and non-negative")
        if np.any(np.diff(v) < -1e-14 * np.maximum(1.0, np.abs(v[1:]))):
            raise MonotonicityViolation(f"{self.label}: f is not non-decreasing")

    def _eval(self, t):
        return np.asarray(self.rule(t), dtype=float)

    def describe(self):
        return self.label


@dataclass(frozen=True)
class Regularized(Nonlinearity):
    """max{f(t), t^{1+sigma}}: positive on (0, eps] without changing the verdict."""
    base: Nonlinearity
    sigma: float
    family = "regularized"

    @property
    def eps(self):
        return self.base.eps

    @property
    def breakpoints(self):
        return self.base.breakpoints

    def _eval(self, t):
        return np.maximum(self.base._eval(t), np.asarray(t, dtype=float) ** (1.0 + self.sigma))

    def describe(self):
        return f"regularized({self.base.describe()})"


def eval_nonlinearity(f: Nonlinearity, t):
    return f(t)


def parse_nonlinearity(text: str, eps: Optional[float] = None) -> Nonlinearity:
    """Parse ``power:q``, ``powerlog:q,alpha``, ``table:<path>`` or ``zero``."""
    text = text.strip()
    kind, _, arg = text.partition(":")
    try:
        if kind == "power":
            return PowerLaw(float(arg), eps=1.0 if eps is None else eps)
        if kind == "powerlog":
            q, alpha = (float(v) for v in arg.split(","))
            return PowerLog(q, alpha, eps=math.exp(-1.0) if eps is None else eps)
        if kind == "zero":
            return Zero(1.0 if eps is None else eps)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"bad nonlinearity descriptor {text!r}: {exc}") from None
    if kind == "table":
        tab = Tabulated.from_csv(arg)
        if eps is not None and abs(eps - tab.eps) > 1e-12 * eps:
            raise InvalidInput(f"table ends at t={tab.eps:g} but eps={eps:g} was requested")
        return tab
    raise InvalidInput(f"unknown nonlinearity descriptor {text!r}")


# --------------------------------------------------------------------------
# radial grids and profiles

@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    layout: str = "custom"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidInput("grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise InvalidInput("grid must start at r = 0")
        if np.any(np.diff(nodes) <= 0) or not np.all(np.isfinite(nodes)):
            raise InvalidInput("grid nodes must be finite and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    @classmethod
    def default(cls, near_nodes: int = 300, ratio: float = 1.01, r_max: float = 1e3,
                near_end: float = 1.0) -> "RadialGrid":
        """Uniform nodes on [0, near_end] followed by a geometric far field."""
        if near_nodes < 2 or ratio <= 1 or r_max <= near_end:
            raise InvalidInput("invalid grid layout")
        near = np.linspace(0.0, near_end, near_nodes)
        k = math.ceil(math.log(r_max / near_end) / math.log(ratio))
        far = near_end * ratio ** np.arange(1, k + 1, dtype=float)
        far = far[far < r_max * (1 - 1e-9)]
        if far.size and r_max / far[-1] < ratio ** 0.25:
            far = far[:-1]
        nodes = np.concatenate([near, far, [r_max]])
        return cls(nodes, layout=f"uniform({near_nodes})+geometric({ratio:g})")

    @classmethod
    def uniform(cls, r_max: float, cells: int) -> "RadialGrid":
        if cells < 1:
            raise InvalidInput("need at least one cell")
        return cls(np.linspace(0.0, r_max, cells + 1), layout=f"uniform({cells})")

    def refined(self, factor: int) -> "RadialGrid":
        """Split every cell into ``factor`` equal sub-cells."""
        if factor < 1:
            raise InvalidInput("refinement factor must be >= 1")
        a, b = self.nodes[:-1], self.nodes[1:]
        frac = np.arange(factor, dtype=float) / factor
        inner = (a[:, None] + (b - a)[:, None] * frac[None, :]).ravel()
        return RadialGrid(np.concatenate([inner, [self.r_max]]), layout=f"{self.layout}x{factor}")

    def with_nodes(self, points) -> "RadialGrid":
        """The grid with extra nodes inserted (points beyond r_max extend it)."""
        extra = np.asarray(points, dtype=float).ravel()
        if np.any(extra < 0) or not np.all(np.isfinite(extra)):
            raise InvalidInput("extra nodes must be finite and non-negative")
        return RadialGrid(np.union1d(self.nodes, extra), layout=f"{self.layout}+{extra.size}")

    def coarsened(self) -> "RadialGrid":
        """Every other node (the last node is always kept)."""
        nodes = self.nodes[::2]
        if nodes[-1] != self.r_max:
            nodes = np.concatenate([nodes, [self.r_max]])
        return RadialGrid(nodes, layout=f"{self.layout}/2")


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Nodal values on a RadialGrid, piecewise linear in r."""
    grid: RadialGrid
    values: np.ndarray
    name: str = "u"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise InvalidInput("profile needs one value per grid node")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("profile values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.grid.r_max * (1 + 1e-14)):
            raise DomainError(f"profile {self.name!r} is defined on [0, {self.grid.r_max:g}]")
        out = np.interp(arr, self.grid.nodes, self.values)
        return float(out) if out.ndim == 0 else out

    def derivative(self) -> np.ndarray:
        """Cell-wise slopes (one per cell)."""
        return np.diff(self.values) / np.diff(self.grid.nodes)

    def is_nonincreasing(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= -tol))


# --------------------------------------------------------------------------
# radial forcing densities

@dataclass(frozen=True, eq=False)
class Forcing:
    """Radial density F(r) >= 0, vectorised.

    ``support`` is the radius beyond which F vanishes identically (None if
    unknown); ``tail_exponent`` k records F(r) ~ r^{-k} at infinity when
    known; ``breakpoints`` are radii where F jumps or has a kink; ``scale``
    is the length on which F varies, used to place quadrature panels.
    """
    func: Callable
    breakpoints: tuple = ()
    support: Optional[float] = None
    tail_exponent: Optional[float] = None
    label: str = "forcing"
    nonincreasing: bool = True
    scale: float = 1.0

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        out = np.asarray(self.func(arr), dtype=float)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return float(out) if out.ndim == 0 else out

    @property
    def is_zero(self) -> bool:
        return self.support == 0.0

    def scaled(self, factor: float) -> "Forcing":
        func = self.func
        return Forcing(lambda r: factor * np.asarray(func(r), dtype=float), self.breakpoints,
                       self.support, self.tail_exponent, f"{factor:g}*{self.label}",
                       self.nonincreasing, self.scale)

    @classmethod
    def indicator(cls, radius: float = 1.0, height: float = 1.0) -> "Forcing":
        return cls(lambda r: np.where(np.asarray(r) <= radius, height, 0.0),
                   breakpoints=(radius,), support=radius, label=f"indicator({radius:g})")

    @classmethod
    def power_decay(cls, k: float, scale: float = 1.0) -> "Forcing":
        """(1 + r/scale)^{-k}."""
        return cls(lambda r: (1.0 + np.asarray(r) / scale) ** (-k),
                   tail_exponent=float(k), label=f"decay({k:g})", scale=scale)

    @classmethod
    def zero(cls) -> "Forcing":
        return cls(lambda r: np.zeros_like(np.asarray(r, dtype=float)), support=0.0, label="zero")

    @classmethod
    def from_profile(cls, profile: RadialProfile) -> "Forcing":
        """Piecewise-linear density, zero beyond the last node."""
        nodes, vals = profile.grid.nodes, profile.values

        def func(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= nodes[-1], np.interp(r, nodes, vals), 0.0)

        return cls(func, breakpoints=tuple(nodes[1:-1].tolist()), support=float(nodes[-1]),
                   label=f"profile({profile.name})",
                   nonincreasing=profile.is_nonincreasing())

    @classmethod
    def parse(cls, text: str) -> "Forcing":
        """``indicator``, ``indicator:R``, ``decay:k`` or ``zero``."""
        kind, _, arg = text.strip().partition(":")
        try:
            if kind == "indicator":
                return cls.indicator(float(arg) if arg else 1.0)
            if kind == "decay":
                return cls.power_decay(float(arg))
            if kind == "zero":
                return cls.zero()
        except ValueError:
            pass
        raise InvalidInput(f"unknown forcing descriptor {text!r}")
