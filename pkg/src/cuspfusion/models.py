"""Logistic regression on polynomial features of (a, b), plus diagnostics.

The estimator minimises

    mean NLL + lam / (2 n) * ||w[1:]||^2

over standardised features with an unpenalised bias, using damped Newton
steps from the zero vector. Everything is full batch and deterministic.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit, gammaincc
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import ConvergenceFailure, DegenerateLabels, InsufficientData, SingularScale, SpecMismatch

EPS_LOG = 1e-12


@dataclass(frozen=True)
class FeatureSpec:
    inputs: tuple = ("a", "b")
    degree: int = 3

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs or set(self.inputs) - {"a", "b"} or len(set(self.inputs)) != len(self.inputs):
            raise SpecMismatch(f"inputs must be a non-empty subset of ('a', 'b'), got {self.inputs!r}")
        if self.degree < 1:
            raise SpecMismatch(f"degree must be >= 1, got {self.degree!r}")

    @property
    def exponents(self):
        """Exponent tuples, one per input, graded by total degree.

        Within a degree the first input's power decreases, so for (a, b) and
        degree 3: 1, a, b, a2, ab, b2, a3, a2b, ab2, b3.
        """
        if len(self.inputs) == 1:
            return [(d,) for d in range(self.degree + 1)]
        return [(i, d - i) for d in range(self.degree + 1) for i in range(d, -1, -1)]

    @property
    def term_order(self):
        names = []
        for powers in self.exponents:
            parts = [
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.inputs, powers) if k
            ]
            names.append("*".join(parts) or "1")
        return names


JOINT = FeatureSpec(("a", "b"))
ONLY_A = FeatureSpec(("a",))
ONLY_B = FeatureSpec(("b",))


def _inputs_matrix(spec, a, b):
    values = {"a": a, "b": b}
    missing = [name for name in spec.inputs if values[name] is None]
    if missing:
        raise SpecMismatch(f"spec needs inputs {spec.inputs}, missing {missing}")
    cols = [np.atleast_1d(np.asarray(values[name], dtype=float)) for name in spec.inputs]
    return np.column_stack(np.broadcast_arrays(*cols))


def _monomials(Z, spec):
    out = np.ones((Z.shape[0], len(spec.exponents)))
    for j, powers in enumerate(spec.exponents):
        for col, k in enumerate(powers):
            if k:
                out[:, j] *= Z[:, col] ** k
    return out


def expand_features(a=None, b=None, spec: FeatureSpec = JOINT):
    """Unstandardised feature vector(s) in ``spec.term_order``.

    Scalars give shape ``(k,)``; arrays give ``(n, k)``.
    """
    scalar = all(np.ndim(v) == 0 for v in (a, b) if v is not None)
    phi = _monomials(_inputs_matrix(spec, a, b), spec)
    return phi[0] if scalar else phi


def _nll_terms(z, y):
    # log(1 + exp(z)) - y*z without overflow
    return np.logaddexp(0.0, z) - y * z


class PolynomialLogisticRegression(ClassifierMixin, BaseEstimator):
    """L2-penalised logistic regression on polynomial features.

    Parameters
    ----------
    inputs : tuple of {"a", "b"}
        Which columns ``X`` holds, in order.
    degree : int
        Total polynomial degree of the expansion.
    lam : float
        Penalty strength; the penalty is ``lam / (2 n) * ||w_nonbias||^2``.
    tol : float
        Convergence threshold on the gradient's infinity norm.
    max_iter : int
        Newton iteration cap.
    """

    def __init__(self, inputs=("a", "b"), degree=3, lam=1.0, tol=1e-8, max_iter=100):
        self.inputs = inputs
        self.degree = degree
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter

    def _design(self, X):
        phi = _monomials(X, self.spec_)
        phi[:, 1:] = (phi[:, 1:] - self.mean_) / self.scale_
        return phi

    def objective(self, w, Phi, y):
        """Penalised mean NLL and its gradient at ``w``."""
        n = Phi.shape[0]
        z = Phi @ w
        penalty = np.r_[0.0, w[1:]] * (self.lam / n)
        loss = _nll_terms(z, y).mean() + 0.5 * float(penalty @ w)
        grad = Phi.T @ (expit(z) - y) / n + penalty
        return loss, grad

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.spec_ = FeatureSpec(tuple(self.inputs), self.degree)
        if X.shape[1] != len(self.spec_.inputs):
            raise SpecMismatch(f"X has {X.shape[1]} columns, spec inputs are {self.spec_.inputs}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam!r}")
        labels = np.unique(y)
        if labels.size < 2:
            raise DegenerateLabels("training labels contain a single class")
        if not np.array_equal(labels, [0.0, 1.0]):
            raise ValueError(f"labels must be 0/1, got {labels}")
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]

        raw = _monomials(X, self.spec_)[:, 1:]
        self.mean_ = raw.mean(axis=0)
        scale = raw.std(axis=0)
        self.singular_scale_ = bool(np.any(scale == 0))
        if self.singular_scale_:
            warnings.warn("zero-variance feature; its scale is set to 1", SingularScale, stacklevel=2)
            scale = np.where(scale == 0, 1.0, scale)
        self.scale_ = scale

        Phi = self._design(X)
        n, k = Phi.shape
        w = np.zeros(k)
        loss, grad = self.objective(w, Phi, y)
        history = [loss]
        ridge = np.diag(np.r_[0.0, np.full(k - 1, self.lam / n)])
        it = 0
        while np.max(np.abs(grad)) > self.tol:
            if it >= self.max_iter:
                raise ConvergenceFailure(
                    f"logistic fit stalled at |grad|_inf={np.max(np.abs(grad)):.3g} after {it} steps"
                )
            it += 1
            s = expit(Phi @ w)
            H = (Phi * (s * (1 - s))[:, None]).T @ Phi / n + ridge
            try:
                direction = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                direction = -np.linalg.lstsq(H, grad, rcond=None)[0]
            # Armijo backtracking keeps the loss sequence non-increasing
            t, slope = 1.0, float(grad @ direction)
            while True:
                w_new = w + t * direction
                loss_new, grad_new = self.objective(w_new, Phi, y)
                if loss_new <= loss + 1e-4 * t * slope or t < 1e-10:
                    break
                t *= 0.5
            if loss_new > loss:
                raise ConvergenceFailure(f"line search failed at |grad|_inf={np.max(np.abs(grad)):.3g}")
            w, loss, grad = w_new, loss_new, grad_new
            history.append(loss)

        self.weights_ = w
        self.intercept_ = w[0]
        self.coef_ = w[1:]
        self.n_iter_ = it
        self.grad_norm_ = float(np.max(np.abs(grad)))
        self.loss_history_ = np.array(history)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise SpecMismatch(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return self._design(X) @ self.weights_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self):
        check_is_fitted(self, "weights_")
        return {
            "inputs": list(self.spec_.inputs),
            "degree": self.spec_.degree,
            "term_order": self.spec_.term_order,
            "lambda": float(self.lam),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
            "weights": self.weights_.tolist(),
            "grad_norm": self.grad_norm_,
            "iterations": self.n_iter_,
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(inputs=tuple(data["inputs"]), degree=data["degree"], lam=data["lambda"])
        model.spec_ = FeatureSpec(model.inputs, model.degree)
        model.mean_ = np.asarray(data["mean"], dtype=float)
        model.scale_ = np.asarray(data["scale"], dtype=float)
        model.weights_ = np.asarray(data["weights"], dtype=float)
        model.intercept_, model.coef_ = model.weights_[0], model.weights_[1:]
        model.grad_norm_ = data.get("grad_norm", 0.0)
        model.n_iter_ = data.get("iterations", 0)
        model.classes_ = np.array([0, 1])
        model.n_features_in_ = len(model.inputs)
        model.singular_scale_ = False
        return model


def _table_inputs(table, spec):
    return np.column_stack([table.column(name) for name in spec.inputs])


def fit(table, spec: FeatureSpec = JOINT, lam=1.0):
    """Fit ``P(y=1 | spec.inputs)`` on a table with the needed columns and y."""
    model = PolynomialLogisticRegression(inputs=spec.inputs, degree=spec.degree, lam=lam)
    return model.fit(_table_inputs(table, spec), table.column("y"))


def predict_proba(model, a=None, b=None):
    """P(y=1) at the given inputs; float for scalars, array otherwise."""
    scalar = all(np.ndim(v) == 0 for v in (a, b) if v is not None)
    X = _inputs_matrix(model.spec_, a, b)
    p = model.predict_proba(X)[:, 1]
    return float(p[0]) if scalar else p


@dataclass(frozen=True)
class ProbabilityGrid:
    a: np.ndarray
    b: np.ndarray
    p: np.ndarray  # shape (len(a), len(b))

    def rows(self):
        """(a, b, p) triples, a-major then b."""
        return [
            (float(av), float(bv), float(self.p[i, j]))
            for i, av in enumerate(self.a)
            for j, bv in enumerate(self.b)
        ]


def probability_grid(model, a_range=(-1.0, 1.0), b_range=(-2.0, 4.0), resolution=100):
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution!r}")
    a = np.linspace(a_range[0], a_range[1], resolution)
    b = np.linspace(b_range[0], b_range[1], resolution)
    A, B = np.meshgrid(a, b, indexing="ij")
    inputs = {"a": A.ravel(), "b": B.ravel()}
    X = np.column_stack([inputs[name] for name in model.spec_.inputs])
    p = model.predict_proba(X)[:, 1].reshape(resolution, resolution)
    return ProbabilityGrid(a, b, p)


def chi2_sf(statistic, dof):
    """Upper tail of the chi-square distribution, Q(dof/2, statistic/2)."""
    return float(gammaincc(dof / 2.0, statistic / 2.0))


def independence_test(b_values, y_values, bins=10, min_per_bin=10):
    """Chi-square test of y against quantile-binned b.

    Returns ``(statistic, p_value)`` with ``bins - 1`` degrees of freedom.
    """
    b = np.asarray(b_values, dtype=float)
    y = np.asarray(y_values, dtype=int)
    if b.shape != y.shape:
        raise ValueError("b and y must have the same length")
    if np.unique(y).size < 2:
        raise DegenerateLabels("y is constant; independence test undefined")
    edges = np.quantile(b, np.linspace(0, 1, bins + 1)[1:-1])
    idx = np.searchsorted(edges, b, side="right")
    counts = np.zeros((bins, 2))
    np.add.at(counts, (idx, y), 1)
    per_bin = counts.sum(axis=1)
    if per_bin.min() < min_per_bin:
        raise InsufficientData(f"a b-bin holds {int(per_bin.min())} samples, need {min_per_bin}")
    expected = np.outer(per_bin, counts.sum(axis=0)) / counts.sum()
    statistic = float(((counts - expected) ** 2 / expected).sum())
    return statistic, chi2_sf(statistic, bins - 1)


@dataclass(frozen=True)
class MetricsReport:
    log_loss: float
    auc: float
    accuracy: float
    n: int
    auc_defined: bool = True

    def to_dict(self):
        d = asdict(self)
        d.pop("auc_defined")
        return d


def roc_auc(y, p):
    """Rank-based AUC (Mann-Whitney), ties get averaged ranks."""
    y = np.asarray(y, dtype=int)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        return None
    ranks = rankdata(p)
    return float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def score_predictions(y, p):
    y = np.asarray(y, dtype=int)
    p = np.asarray(p, dtype=float)
    pc = np.clip(p, EPS_LOG, 1 - EPS_LOG)
    log_loss = float(-np.mean(y * np.log(pc) + (1 - y) * np.log(1 - pc)))
    auc = roc_auc(y, p)
    accuracy = float(np.mean((p >= 0.5).astype(int) == y))
    return MetricsReport(
        log_loss=log_loss,
        auc=0.5 if auc is None else auc,
        accuracy=accuracy,
        n=int(y.size),
        auc_defined=auc is not None,
    )


def evaluate(model, table) -> MetricsReport:
    X = _table_inputs(table, model.spec_)
    return score_predictions(table.column("y"), model.predict_proba(X)[:, 1])
