"""Soft-margin RBF support vector machines trained by SMO, composed one-vs-one."""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .classes import CLASSES, VOTE_ORDER
from .errors import DegenerateDataError, DimensionError, FormatError, NumericError
from .select import FeatureSubset

log = logging.getLogger(__name__)

MODEL_VERSION = 1
_TAU = 1e-12


@dataclass(frozen=True)
class KernelParams:
    """RBF width ``gamma`` (None: 1 / n_features at train time) and penalty ``c``."""

    gamma: Optional[float] = None
    c: float = 0.4

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")

    def resolved(self, n_features):
        if self.gamma is not None:
            return self
        return replace(self, gamma=1.0 / max(1, n_features))


def rbf(x, y, gamma):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"rbf needs equal shapes, got {x.shape} and {y.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def rbf_matrix(A, B, gamma):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True, eq=False)
class BinaryMachine:
    """Decision function sum_i dual_coefs[i] * K(sv_i, x) + bias; positive means class_pair[0]."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    params: KernelParams
    class_pair: tuple = ("+1", "-1")
    alphas: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    objective_history: list = field(default_factory=list, repr=False)

    def decision(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if len(self.support_vectors) == 0:
            return np.full(len(X), self.bias)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DimensionError(
                f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}"
            )
        K = rbf_matrix(X, self.support_vectors, self.params.gamma)
        return K @ self.dual_coefs + self.bias

    def predict_sign(self, X):
        return np.where(self.decision(X) >= 0, 1, -1)


def _dual_objective(alpha, grad):
    # W(alpha) = sum(alpha) - 0.5 alpha' Q alpha, with grad = Q alpha - 1
    return float(alpha.sum() - 0.5 * alpha @ (grad + 1.0))


def smo_train(X, y, params, tol=1e-3, max_iter=100_000, keep_all=False):
    """Solve the soft-margin dual by sequential minimal optimization.

    Each step picks the maximal-violating pair (second-order working-set
    rule), solves the two-variable subproblem analytically, and clips the
    result to the box [L, H] implied by ``0 <= alpha <= C`` and the equality
    constraint. Stops once the KKT gap ``max_up(-y G) - min_low(-y G)`` is at
    most ``tol``. ``y`` must hold +1 / -1.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionError("X must be 2-D with one label per row")
    if not np.all(np.isfinite(X)):
        raise NumericError("non-finite feature value")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be +1 or -1")
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("SMO needs both +1 and -1 examples")
    params = params.resolved(X.shape[1])
    C = params.c
    n = len(y)
    K = rbf_matrix(X, X, params.gamma)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()

    alpha = np.zeros(n)
    grad = -np.ones(n)
    history = [0.0]
    iterations = 0
    while True:
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        g_max = minus_yg[i]
        g_min = minus_yg[low].min()
        if g_max - g_min <= tol:
            break
        if iterations >= max_iter:
            warnings.warn(f"SMO stopped at max_iter={max_iter} with KKT gap {g_max - g_min:.3g}")
            break
        # second-order choice of j among violating low-set members
        cand = np.flatnonzero(low & (minus_yg < g_max))
        b = g_max - minus_yg[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, _TAU)
        j = int(cand[np.argmin(-(b * b) / a)])

        # Analytic update of the pair (i, j) with Platt's clipping bounds.
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        if yi != yj:
            lo, hi = max(0.0, aj - ai), min(C, C + aj - ai)
        else:
            lo, hi = max(0.0, ai + aj - C), min(C, ai + aj)
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        if eta <= 0:
            eta = _TAU
        err_i, err_j = yi * grad[i], yj * grad[j]
        aj_new = min(hi, max(lo, aj + yj * (err_i - err_j) / eta))
        ai_new = ai + yi * yj * (aj - aj_new)
        ai_new = min(C, max(0.0, ai_new))
        # Snap rounding residue onto the bounds.
        ai_new = 0.0 if ai_new < 1e-12 * C else (C if ai_new > C * (1 - 1e-12) else ai_new)
        aj_new = 0.0 if aj_new < 1e-12 * C else (C if aj_new > C * (1 - 1e-12) else aj_new)
        d_i, d_j = ai_new - ai, aj_new - aj
        alpha[i], alpha[j] = ai_new, aj_new
        grad += Q[:, i] * d_i + Q[:, j] * d_j
        history.append(_dual_objective(alpha, grad))
        iterations += 1

    minus_yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(minus_yg[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        hi_b = minus_yg[low].min() if low.any() else minus_yg[up].max()
        lo_b = minus_yg[up].max() if up.any() else hi_b
        bias = float((lo_b + hi_b) / 2.0)

    keep = np.ones(n, dtype=bool) if keep_all else alpha > 0
    return BinaryMachine(
        support_vectors=X[keep].copy(),
        dual_coefs=(alpha * y)[keep],
        bias=bias,
        params=params,
        alphas=alpha[keep].copy(),
        labels=y[keep].copy(),
        objective_history=history,
    )


@dataclass(frozen=True, eq=False)
class SVMModel:
    classes: tuple
    machines: tuple
    params: KernelParams
    feature_subset: FeatureSubset
    scaler_mean: np.ndarray
    scaler_std: np.ndarray

    @property
    def n_features(self):
        return len(self.scaler_mean)

    def restrict(self, X_full):
        """Select the model's feature subset from full-width vectors."""
        X_full = np.atleast_2d(np.asarray(X_full, dtype=np.float64))
        return X_full[:, list(self.feature_subset.indices)]

    def standardize(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise DimensionError(f"model expects {self.n_features} features, got {X.shape[1]}")
        return (X - self.scaler_mean) / self.scaler_std


def _fit_scaler(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    return mean, std


def ovo_train(X, labels, params=KernelParams(), classes=CLASSES, feature_subset=None,
              standardize=True, tol=1e-3):
    """Train one binary machine per pair of classes present in ``labels``.

    ``X`` holds full-width vectors; ``feature_subset`` (default: all columns)
    picks the columns the model uses. Features are standardized with the
    training mean and standard deviation unless ``standardize`` is False.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels, dtype=object)
    if len(X) != len(labels):
        raise DimensionError("one label per row required")
    unknown = set(labels) - set(classes)
    if unknown:
        raise FormatError(f"labels outside the class set: {sorted(unknown)}")
    present = tuple(c for c in classes if np.any(labels == c))
    missing = [c for c in classes if c not in present]
    if len(present) < 2:
        raise DegenerateDataError(f"need at least two classes, found {list(present)}")
    if missing:
        warnings.warn(f"classes without samples are excluded: {missing}")

    if feature_subset is None:
        feature_subset = FeatureSubset(tuple(range(X.shape[1])), 0.0)
    elif not isinstance(feature_subset, FeatureSubset):
        feature_subset = FeatureSubset(tuple(feature_subset), 0.0)
    Xs = X[:, list(feature_subset.indices)]
    if standardize:
        mean, std = _fit_scaler(Xs)
    else:
        mean, std = np.zeros(Xs.shape[1]), np.ones(Xs.shape[1])
    Z = (Xs - mean) / std
    params = params.resolved(Z.shape[1])

    machines = []
    for a, b in itertools.combinations(present, 2):
        mask = (labels == a) | (labels == b)
        y = np.where(labels[mask] == a, 1.0, -1.0)
        machine = smo_train(Z[mask], y, params, tol=tol)
        machines.append(replace(machine, class_pair=(a, b), objective_history=[]))
    return SVMModel(present, tuple(machines), params, feature_subset, mean, std)


def _vote(model, decisions):
    votes = {c: 0 for c in model.classes}
    strength = {c: 0.0 for c in model.classes}
    for machine, value in zip(model.machines, decisions):
        winner = machine.class_pair[0] if value >= 0 else machine.class_pair[1]
        votes[winner] += 1
        strength[winner] += abs(value)
    top = max(votes.values())
    tied = [c for c in model.classes if votes[c] == top]
    if len(tied) == 1:
        return tied[0]
    best = max(strength[c] for c in tied)
    tied = [c for c in tied if strength[c] == best]
    order = {c: i for i, c in enumerate(VOTE_ORDER)}
    return min(tied, key=lambda c: (order.get(c, len(order)), c))


def decision_values(model, X):
    """(n_samples, n_machines) decision values for feature-subset-restricted inputs."""
    Z = model.standardize(X)
    return np.column_stack([m.decision(Z) for m in model.machines])


def predict(model, x):
    """Majority vote over the one-vs-one machines for one restricted vector."""
    return predict_many(model, np.atleast_2d(x))[0]


def predict_many(model, X):
    decisions = decision_values(model, X)
    return [_vote(model, row) for row in decisions]


def grid_search_c(X, labels, groups, candidates, folds=10, seed=0, gamma=None,
                  feature_subset=None):
    """Pick the C with the best mean k-fold accuracy (ties: smaller C)."""
    from .splits import kfold

    candidates = sorted(float(c) for c in candidates)
    if not candidates:
        raise ValueError("no candidate C values")
    if len(candidates) == 1:
        return candidates[0]
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=object)
    fold_sets = kfold(labels, groups, k=folds, seed=seed)
    best_c, best_acc = candidates[0], -1.0
    for c in candidates:
        scores = []
        for test_idx in fold_sets:
            train_mask = np.ones(len(labels), dtype=bool)
            train_mask[test_idx] = False
            if len(set(labels[train_mask])) < 2:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model = ovo_train(X[train_mask], labels[train_mask], KernelParams(gamma, c),
                                  feature_subset=feature_subset)
            pred = predict_many(model, model.restrict(X[test_idx]))
            scores.append(np.mean(np.asarray(pred, dtype=object) == labels[test_idx]))
        acc = float(np.mean(scores)) if scores else 0.0
        log.info("C=%g: mean CV accuracy %.4f", c, acc)
        if acc > best_acc + 1e-12:
            best_c, best_acc = c, acc
    return best_c


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def save_model(model, path):
    """Versioned plain-text model file (exact float round-trip via repr)."""
    lines = [
        f"edgegrid-svm {MODEL_VERSION}",
        "classes " + " ".join(model.classes),
        f"gamma {model.params.gamma!r}",
        f"c {model.params.c!r}",
        f"subset {model.feature_subset.merit!r} " + " ".join(map(str, model.feature_subset.indices)),
        "scaler_mean " + _fmt(model.scaler_mean),
        "scaler_std " + _fmt(model.scaler_std),
        f"machines {len(model.machines)}",
    ]
    for m in model.machines:
        lines.append(f"machine {m.class_pair[0]} {m.class_pair[1]}")
        lines.append(f"bias {m.bias!r}")
        lines.append(f"support {len(m.dual_coefs)}")
        for coef, sv in zip(m.dual_coefs, m.support_vectors):
            lines.append(_fmt([coef, *sv]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    it = iter(lines)

    def field_(name):
        line = next(it, None)
        if line is None or not line.startswith(name):
            raise FormatError(f"{path}: expected '{name}' line")
        return line[len(name):].strip()

    header = field_("edgegrid-svm")
    if int(header) != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {header}")
    classes = tuple(field_("classes").split())
    gamma = float(field_("gamma"))
    c = float(field_("c"))
    subset_parts = field_("subset").split()
    subset = FeatureSubset(tuple(int(v) for v in subset_parts[1:]), float(subset_parts[0]))
    mean = np.array([float(v) for v in field_("scaler_mean").split()])
    std = np.array([float(v) for v in field_("scaler_std").split()])
    params = KernelParams(gamma, c)
    machines = []
    for _ in range(int(field_("machines"))):
        pair = tuple(field_("machine").split())
        bias = float(field_("bias"))
        count = int(field_("support"))
        rows = [np.array([float(v) for v in next(it).split()]) for _ in range(count)]
        coefs = np.array([r[0] for r in rows])
        svs = np.array([r[1:] for r in rows]).reshape(count, len(mean))
        machines.append(BinaryMachine(svs, coefs, bias, params, pair))
    return SVMModel(classes, tuple(machines), params, subset, mean, std)
