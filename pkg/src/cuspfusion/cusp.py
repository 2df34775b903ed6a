"""Cusp potential V(x; a, b) = x**4/4 - a*x - b*x**2/2 and its critical points.

Everything here works on plain Python floats: a single minimisation is a few
dozen function evaluations, so avoiding numpy overhead keeps a population of
10**4 people well under a second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConvergenceFailure, CurvatureFailure

DEGENERATE_TOL = 1e-12
STATIONARITY_TOL = 1e-8
CURVATURE_TOL = 1e-8


class CuspParams(NamedTuple):
    a: float
    b: float


class Stability(str, Enum):
    MONOSTABLE = "monostable"
    BISTABLE = "bistable"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CriticalPointSet:
    minima: tuple
    maximum: Optional[float] = None
    degenerate: bool = False


@dataclass(frozen=True)
class MinimizerConfig:
    initial_step: float = 0.1
    x_tolerance: float = 1e-10
    f_tolerance: float = 1e-12
    max_iterations: int = 500

    def __post_init__(self):
        for name in ("initial_step", "x_tolerance", "f_tolerance"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")


def potential(x, params):
    a, b = params
    return x**4 / 4 - a * x - b * x**2 / 2


def gradient(x, params):
    a, b = params
    return x**3 - a - b * x


def curvature(x, params):
    return 3 * x * x - params[1]


def cusp_bound(b):
    """Largest |a| for which (a, b) has two minima; 0 for b <= 0."""
    return 2.0 * (b / 3.0) ** 1.5 if b > 0 else 0.0


def is_bistable(params) -> Stability:
    a, b = params
    if b <= 0:
        return Stability.MONOSTABLE
    gap = abs(a) - cusp_bound(b)
    if abs(gap) <= DEGENERATE_TOL:
        return Stability.DEGENERATE
    return Stability.BISTABLE if gap < 0 else Stability.MONOSTABLE


def bistable_mask(a, b):
    """Vectorised ``is_bistable(...) is BISTABLE`` over arrays of a and b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bound = 2.0 * np.power(np.clip(b, 0.0, None) / 3.0, 1.5)
    return (b > 0) & (np.abs(a) < bound - DEGENERATE_TOL)


def fold_boundary_b(a):
    """Smallest b at which (a, b) sits on the cusp curve."""
    return 3.0 * (abs(a) / 2.0) ** (2.0 / 3.0)


def _polish_root(x, a, b, steps=3):
    # Newton on x**3 - b*x - a; only accept steps that shrink the residual.
    r = x**3 - b * x - a
    for _ in range(steps):
        d = 3 * x * x - b
        if d == 0 or r == 0:
            break
        try:
            xn = x - r / d
            rn = xn**3 - b * xn - a
        except OverflowError:
            break
        if abs(rn) >= abs(r):
            break
        x, r = xn, rn
    return x


def _real_roots(a, b):
    """Sorted real roots of x**3 - b*x - a from the closed-form solution.

    Three distinct roots (negative discriminant) use the trigonometric form;
    otherwise Cardano in the cancellation-free ``u + (b/3)/u`` arrangement
    gives the single real root (the simple one when a double root exists).
    """
    disc = a * a / 4.0 - b**3 / 27.0
    if b > 0 and disc < 0:
        r = 2.0 * math.sqrt(b / 3.0)
        arg = (3.0 * a / (2.0 * b)) * math.sqrt(3.0 / b)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        return sorted(
            _polish_root(r * math.cos(phi - 2.0 * math.pi * k / 3.0), a, b) for k in range(3)
        )
    if a == 0.0 and b == 0.0:
        return [0.0]
    s = math.sqrt(max(disc, 0.0))
    u = math.copysign(abs(abs(a) / 2.0 + s) ** (1.0 / 3.0), a if a != 0 else 1.0)
    root = u + (b / 3.0) / u if u != 0 else 0.0
    return [_polish_root(root, a, b)]


def critical_points(params) -> CriticalPointSet:
    """All stationary points of V, classified by the sign of V''."""
    a, b = float(params[0]), float(params[1])
    kind = is_bistable((a, b))
    roots = _real_roots(a, b)

    if kind is Stability.BISTABLE:
        return CriticalPointSet(minima=(roots[0], roots[2]), maximum=roots[1])
    if kind is Stability.DEGENERATE or (a == 0.0 and b == 0.0):
        # within tolerance of the fold: keep only the minimum that survives
        # crossing it, i.e. the one on the sign(a) side
        if len(roots) == 3:
            minima = (roots[2],) if a > 0 else (roots[0],) if a < 0 else (roots[0], roots[2])
        else:
            minima = (roots[0],)
        return CriticalPointSet(minima=minima, degenerate=True)
    return CriticalPointSet(minima=(roots[-1] if a > 0 else roots[0],))


def basin_minimum(x0, params):
    """Analytic minimum whose basin of attraction contains ``x0``."""
    roots = _real_roots(float(params[0]), float(params[1]))
    if len(roots) == 1:
        return roots[0]
    return roots[0] if x0 < roots[1] else roots[2]


def nelder_mead_1d(func, x0, step, x_tolerance, f_tolerance, max_iterations, feasible=None):
    """Nelder-Mead on a two-vertex simplex {x0, x0 + step}.

    Standard coefficients: reflection 1, expansion 2, contraction 0.5,
    shrink 0.5. ``feasible(x_best, x_trial)``, when given, can veto a trial
    point, which then scores +inf. Returns ``(x_best, f_best, iterations)``;
    raises ConvergenceFailure when ``max_iterations`` runs out.
    """
    xb, xw = x0, x0 + step
    if feasible is not None:
        while not feasible(xb, xw):
            step *= 0.5
            xw = x0 + step
    fb, fw = func(xb), func(xw)
    for it in range(max_iterations + 1):
        if fw < fb:
            xb, xw, fb, fw = xw, xb, fw, fb
        if abs(xw - xb) <= x_tolerance and abs(fw - fb) <= f_tolerance:
            return xb, fb, it
        if it == max_iterations:
            break

        # every vertex is feasible, so contractions and shrinks need no check
        xr = 2.0 * xb - xw
        fr = func(xr) if feasible is None or feasible(xb, xr) else math.inf
        if fr < fb:
            xe = 3.0 * xb - 2.0 * xw
            fe = func(xe) if feasible is None or feasible(xb, xe) else math.inf
            if fe < fr:
                xw, fw = xe, fe
            else:
                xw, fw = xr, fr
            continue
        if fr < fw:
            xc = 1.5 * xb - 0.5 * xw
            fc = func(xc)
            if fc <= fr:
                xw, fw = xc, fc
                continue
        else:
            xcc = 0.5 * (xb + xw)
            fcc = func(xcc)
            if fcc < fw:
                xw, fw = xcc, fcc
                continue
        xw = xb + 0.5 * (xw - xb)
        fw = func(xw)

    raise ConvergenceFailure(
        f"Nelder-Mead did not converge in {max_iterations} iterations (x={xb!r})"
    )


def _same_basin(x_from, x_to, a, b):
    """False when a local maximum of V lies strictly between the two points.

    Along the path, d/dt V = s*V' changes from + to - exactly at a maximum.
    V' is monotone between the inflection points of V (x = +-sqrt(b/3)), so
    its signs at the end points and at the inflections in between suffice.
    """
    if x_to == x_from:
        return True
    s = 1.0 if x_to > x_from else -1.0
    probes = [x_from]
    if b > 0:
        r = math.sqrt(b / 3.0)
        inner = [p for p in (-r, r) if min(x_from, x_to) < p < max(x_from, x_to)]
        probes += inner if s > 0 else inner[::-1]
    probes.append(x_to)
    rising = False
    for p in probes:
        slope = s * (p**3 - a - b * p)
        if slope > 0:
            rising = True
        elif slope < 0 and rising:
            return False
    return True


def _minimize_once(x0, a, b, cfg):
    def f(x):
        return x**4 / 4 - a * x - b * x**2 / 2

    def feasible(x_best, x_trial):
        return _same_basin(x_best, x_trial, a, b)

    # first step points downhill, trial points beyond a maximum are vetoed
    g0 = x0**3 - a - b * x0
    step = -cfg.initial_step if g0 > 0 else cfg.initial_step
    x, _, _ = nelder_mead_1d(
        f, x0, step, cfg.x_tolerance, cfg.f_tolerance, cfg.max_iterations, feasible
    )
    return _polish_root(x, a, b, steps=8) if 3 * x * x - b > 0 else x


def local_minimum_from(x0, params, cfg: MinimizerConfig = MinimizerConfig()):
    """Local minimum of V reached by Nelder-Mead started at ``x0``.

    The simplex result is refined with guarded Newton steps on V'(x) = 0;
    function-value comparisons alone cannot resolve x much below 1e-8.
    """
    a, b = float(params[0]), float(params[1])
    x = _minimize_once(float(x0), a, b, cfg)
    if 3 * x * x - b < -CURVATURE_TOL:
        side = 1.0 if x0 >= x else -1.0
        x = _minimize_once(float(x0) + 0.5 * side, a, b, cfg)
        if 3 * x * x - b < -CURVATURE_TOL:
            raise CurvatureFailure(f"converged to a maximum at x={x!r} for a={a!r}, b={b!r}")
    if abs(x**3 - a - b * x) > STATIONARITY_TOL:
        raise ConvergenceFailure(
            f"stationarity residual {abs(x**3 - a - b * x):.3g} exceeds {STATIONARITY_TOL}"
        )
    return x
