"""Reproducible populations of simulated voters.

Random stream: ``numpy.random.Generator(PCG64(seed))``. For person ``i`` the
generator's ``random()`` yields four consecutive doubles in the order
``a, b, x0, u``; a, b and x0 are mapped affinely onto their ranges and ``u``
is the raw Bernoulli variate for the vote. The whole ``(n, 4)`` block is drawn
in one call (row-major), which is the same stream as drawing person by person.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cusp import (
    CURVATURE_TOL,
    STATIONARITY_TOL,
    MinimizerConfig,
    basin_minimum,
    local_minimum_from,
)
from .errors import ConvergenceFailure, CurvatureFailure, DomainError


@dataclass(frozen=True)
class SamplerConfig:
    n: int = 1000
    seed: int = 0
    sigma: float = 10.0
    a_range: tuple = (-1.0, 1.0)
    b_range: tuple = (-2.0, 4.0)
    x0_range: tuple = (-1.0, 1.0)
    minimizer: MinimizerConfig = field(default_factory=MinimizerConfig)
    exact_mode: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")
        for name in ("a_range", "b_range", "x0_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} needs lower < upper, got {(lo, hi)!r}")


@dataclass(frozen=True)
class Person:
    id: int
    a: float
    b: float
    x0: float
    x: float
    p: float
    y: int


def vote_probability(x, sigma):
    """Logistic link 1 / (1 + exp(-sigma * x)), split by sign to avoid overflow."""
    z = sigma * x
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def sample_vote(p, u):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    return 1 if u < p else 0


def _scale(u, interval):
    lo, hi = interval
    return lo + (hi - lo) * u


def sample_population(cfg: SamplerConfig = SamplerConfig()):
    """Draw ``cfg.n`` people: uniform (a, b, x0), latent minimum x, vote y."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    variates = rng.random((cfg.n, 4))
    people = []
    for i, (ua, ub, ux, u) in enumerate(variates.tolist()):
        a = _scale(ua, cfg.a_range)
        b = _scale(ub, cfg.b_range)
        x0 = _scale(ux, cfg.x0_range)
        if cfg.exact_mode:
            x = basin_minimum(x0, (a, b))
        else:
            try:
                x = local_minimum_from(x0, (a, b), cfg.minimizer)
            except ConvergenceFailure as exc:
                raise ConvergenceFailure(str(exc), index=i) from exc
            except CurvatureFailure as exc:
                raise CurvatureFailure(f"person {i}: {exc}") from exc
        p = vote_probability(x, cfg.sigma)
        people.append(Person(id=i, a=a, b=b, x0=x0, x=x, p=p, y=sample_vote(p, u)))
    return people


def person_violations(person: Person, cfg: SamplerConfig = SamplerConfig()):
    """List the invariants ``person`` breaks (empty when it is valid)."""
    problems = []
    for name, value, (lo, hi) in (
        ("a", person.a, cfg.a_range),
        ("b", person.b, cfg.b_range),
        ("x0", person.x0, cfg.x0_range),
    ):
        if not lo <= value <= hi:
            problems.append(f"{name}={value!r} outside [{lo}, {hi}]")
    x, a, b = person.x, person.a, person.b
    if abs(x**3 - b * x - a) > STATIONARITY_TOL:
        problems.append("stationarity")
    if 3 * x * x - b < -CURVATURE_TOL:
        problems.append("curvature")
    if person.p != vote_probability(x, cfg.sigma):
        problems.append("p does not match the logistic link")
    if person.y not in (0, 1):
        problems.append(f"y={person.y!r}")
    return problems


def mirror(person: Person, sigma=10.0) -> Person:
    """Image under (a, x0, x, y) -> (-a, -x0, -x, 1 - y); p is recomputed from x."""
    return Person(
        id=person.id, a=-person.a, b=person.b, x0=-person.x0, x=-person.x,
        p=vote_probability(-person.x, sigma), y=1 - person.y,
    )


def to_arrays(population):
    """Column arrays keyed by field name."""
    cols = {name: [] for name in ("id", "a", "b", "x0", "x", "p", "y")}
    for person in population:
        for name in cols:
            cols[name].append(getattr(person, name))
    return {
        name: np.asarray(values, dtype=int if name in ("id", "y") else float)
        for name, values in cols.items()
    }


class CuspLatentTransformer(TransformerMixin, BaseEstimator):
    """Map rows ``(a, b, x0)`` to the latent minimum reached from ``x0``.

    Stateless apart from input validation, so it can sit in a Pipeline in
    front of a model of the vote probability.
    """

    def __init__(self, exact=False, initial_step=0.1, x_tolerance=1e-10,
                 f_tolerance=1e-12, max_iterations=500):
        self.exact = exact
        self.initial_step = initial_step
        self.x_tolerance = x_tolerance
        self.f_tolerance = f_tolerance
        self.max_iterations = max_iterations

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=3)
        if X.shape[1] != 3:
            raise ValueError(f"expected columns (a, b, x0), got {X.shape[1]} features")
        self.n_features_in_ = 3
        self.minimizer_ = MinimizerConfig(
            self.initial_step, self.x_tolerance, self.f_tolerance, self.max_iterations
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "minimizer_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.exact:
            out = [basin_minimum(x0, (a, b)) for a, b, x0 in X.tolist()]
        else:
            out = [local_minimum_from(x0, (a, b), self.minimizer_) for a, b, x0 in X.tolist()]
        return np.asarray(out).reshape(-1, 1)
