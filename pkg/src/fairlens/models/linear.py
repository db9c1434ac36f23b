"""From-scratch linear classifiers: logistic regression and linear SVM.

Both models learn a weight vector and bias over the raw integer-coded
feature matrix (optionally standard-scaled), expose a probability for
the positive class, and are deterministic for a fixed seed.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import SingleClassData
from ..seeding import generator, split_seed


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray  # zero-variance columns recorded as std 1

    def transform(self, X):
        return (X - self.mean) / self.std

    @classmethod
    def fit(cls, X):
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return cls(mean=mean, std=std)


def _check_two_classes(y):
    if len(np.unique(y)) < 2:
        raise SingleClassData("training labels contain a single class")


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------


def logistic_objective(params, X, y, penalty, C, fit_intercept):
    """Penalized mean log-loss and its gradient.

    ``params`` stacks [w, b] when fitting an intercept. The penalty is
    scaled by 1/(C n) so C matches the usual inverse-regularization
    convention. For the l1 penalty the gradient is the subgradient
    sign(w), valid away from zero coordinates.
    """
    n, d = X.shape
    if fit_intercept:
        w, b = params[:d], params[d]
    else:
        w, b = params, 0.0
    s = 2.0 * y - 1.0  # labels in {-1, +1}
    z = X @ w + b
    m = s * z
    loss = float(np.mean(np.logaddexp(0.0, -m)))
    # d/dm log(1+e^-m) = -sigmoid(-m)
    coef = -s * sigmoid(-m) / n
    grad_w = X.T @ coef
    grad_b = float(np.sum(coef))

    if penalty == "l2":
        loss += 0.5 * float(w @ w) / (C * n)
        grad_w = grad_w + w / (C * n)
    elif penalty == "l1":
        loss += float(np.abs(w).sum()) / (C * n)
        grad_w = grad_w + np.sign(w) / (C * n)

    if fit_intercept:
        return loss, np.concatenate([grad_w, [grad_b]])
    return loss, grad_w


def train_logistic(X, y, hp):
    """Full-batch gradient descent with backtracking line search.

    Returns (weights, bias, converged). Convergence is gradient
    sup-norm below hp.tol; hitting max_iter is not an error.
    """
    _check_two_classes(y)
    n, d = X.shape
    n_params = d + 1 if hp.fit_intercept else d
    params = np.zeros(n_params)
    loss, grad = logistic_objective(params, X, y, hp.penalty, hp.C, hp.fit_intercept)
    step = 1.0
    converged = False
    for _ in range(hp.max_iter):
        if float(np.max(np.abs(grad))) < hp.tol:
            converged = True
            break
        g2 = float(grad @ grad)
        step = min(step * 2.0, 1e6)
        while True:
            trial = params - step * grad
            trial_loss, trial_grad = logistic_objective(
                trial, X, y, hp.penalty, hp.C, hp.fit_intercept
            )
            if trial_loss <= loss - 1e-4 * step * g2:
                break
            step *= 0.5
            if step < 1e-16:
                break
        if step < 1e-16:
            break
        params, loss, grad = trial, trial_loss, trial_grad
    else:
        converged = float(np.max(np.abs(grad))) < hp.tol

    if hp.fit_intercept:
        return params[:d], float(params[d]), converged
    return params, 0.0, converged


# ---------------------------------------------------------------------------
# linear SVM (Pegasos-style subgradient descent on the hinge loss)
# ---------------------------------------------------------------------------


def train_svm_raw(X, y, C, tol, max_iter):
    """Deterministic full-batch Pegasos updates.

    Minimizes (lam/2)||v||^2 + mean hinge with lam = 1/(C n) over the
    bias-augmented weight vector v = [w, b] (constant-1 column appended
    to X), with the usual projection onto the 1/sqrt(lam) ball.
    """
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    lam = 1.0 / (C * n)
    v = np.zeros(d + 1)
    s = 2.0 * y - 1.0
    radius = 1.0 / math.sqrt(lam)
    converged = False
    for t in range(1, max_iter + 1):
        margins = s * (Xa @ v)
        viol = margins < 1.0
        if viol.any():
            push = (s[viol][:, None] * Xa[viol]).sum(axis=0) / n
        else:
            push = np.zeros(d + 1)
        new_v = (1.0 - 1.0 / t) * v + push / (lam * t)
        norm = float(np.linalg.norm(new_v))
        if norm > radius:
            new_v *= radius / norm
        delta = float(np.linalg.norm(new_v - v))
        v = new_v
        if delta <= tol * max(1.0, norm):
            converged = True
            break
    return v[:d], float(v[d]), converged


def _platt_fit(margins, y, max_newton=100):
    """Sigmoid calibration p = sigmoid(a m + b) via Newton iterations.

    Uses the standard smoothed targets so the fit stays finite even on
    separable margins.
    """
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    a, b = 0.0, math.log((n_pos + 1.0) / (n_neg + 1.0))
    m = np.asarray(margins, dtype=np.float64)
    for _ in range(max_newton):
        z = a * m + b
        p = sigmoid(z)
        g_a = float(np.sum((p - t) * m))
        g_b = float(np.sum(p - t))
        w = p * (1.0 - p)
        h_aa = float(np.sum(w * m * m)) + 1e-12
        h_ab = float(np.sum(w * m))
        h_bb = float(np.sum(w)) + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        if det <= 0:
            break
        da = (h_bb * g_a - h_ab * g_b) / det
        db = (h_aa * g_b - h_ab * g_a) / det
        a -= da
        b -= db
        if abs(da) + abs(db) < 1e-10:
            break
    return float(a), float(b)


def calibrate_svm(X, y, hp, seed, n_folds=3):
    """Platt calibration on out-of-fold margins.

    Falls back to the identity sigmoid(margin) when any training fold
    complement is single-class. Returns (a, b, source).
    """
    n = len(y)
    rng = generator(split_seed(seed, "platt"))
    order = rng.permutation(n)
    folds = np.array_split(order, n_folds)
    oof_margins = []
    oof_labels = []
    for k in range(n_folds):
        held = folds[k]
        train_idx = np.concatenate([folds[i] for i in range(n_folds) if i != k])
        y_train = y[train_idx]
        if len(np.unique(y_train)) < 2 or len(held) == 0:
            return 1.0, 0.0, "fallback"
        w, b, _ = train_svm_raw(X[train_idx], y_train, hp.C, hp.tol, hp.max_iter)
        oof_margins.append(X[held] @ w + b)
        oof_labels.append(y[held])
    margins = np.concatenate(oof_margins)
    labels = np.concatenate(oof_labels)
    a, b = _platt_fit(margins, labels)
    return a, b, "platt-3fold"


# ---------------------------------------------------------------------------
# trained model container (shared by both linear kinds)
# ---------------------------------------------------------------------------


@dataclass
class LinearModel:
    kind: str
    hyperparams: object
    weights: np.ndarray
    bias: float
    scaler: Optional[Scaler]
    feature_stds: np.ndarray  # training-column stds captured for logic export
    converged: bool
    train_seed: int
    calibration: Optional[tuple] = None  # (a, b, source) for SVM confidence

    @property
    def n_features(self):
        return len(self.weights)

    def decision_values(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.scaler is not None:
            X = self.scaler.transform(X)
        return X @ self.weights + self.bias

    def predict_proba_batch(self, X):
        z = self.decision_values(X)
        if self.kind == "LogisticRegression":
            return sigmoid(z)
        a, b, _ = self.calibration if self.calibration else (1.0, 0.0, "fallback")
        return sigmoid(a * z + b)

    def to_state(self):
        return {
            "kind": self.kind,
            "hyperparams": self.hyperparams.to_json(),
            "weights": [float(v) for v in self.weights],
            "bias": float(self.bias),
            "scaler": None
            if self.scaler is None
            else {
                "mean": [float(v) for v in self.scaler.mean],
                "std": [float(v) for v in self.scaler.std],
            },
            "feature_stds": [float(v) for v in self.feature_stds],
            "converged": bool(self.converged),
            "train_seed": int(self.train_seed),
            "calibration": None
            if self.calibration is None
            else {
                "a": float(self.calibration[0]),
                "b": float(self.calibration[1]),
                "source": self.calibration[2],
            },
        }
