"""The four classical model kinds: training, prediction, logic export.

Training is deterministic for a fixed (kind, hyperparams, dataset,
seed). Hyperparameter records carry an optional ``seed`` field
mirroring the usual random_state knob; when unset, the seed passed to
:func:`train` governs.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatch, SingleClassData
from .linear import LinearModel, Scaler, calibrate_svm, train_logistic, train_svm_raw
from .logic import ModelLogic, WeightEntry, export_logic
from .tree import (
    ForestModel,
    Leaf,
    Node,
    TreeModel,
    flatten_tree,
    forest_tree_seed,
    train_forest,
    train_tree,
    tree_from_flat,
)

LOGISTIC_REGRESSION = "LogisticRegression"
DECISION_TREE = "DecisionTree"
RANDOM_FOREST = "RandomForest"
LINEAR_SVM = "LinearSVM"

MODEL_KINDS = (LOGISTIC_REGRESSION, DECISION_TREE, RANDOM_FOREST, LINEAR_SVM)


@dataclass(frozen=True)
class LRParams:
    penalty: str = "l2"  # l1 | l2 | none
    C: float = 1.0
    tol: float = 1e-4
    max_iter: int = 500
    fit_intercept: bool = True
    standard_scale: bool = True

    def __post_init__(self):
        if self.penalty not in ("l1", "l2", "none"):
            raise ValueError(f"bad penalty {self.penalty!r}")
        if self.C <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("LR hyperparameters out of range")

    def to_json(self):
        return {
            "penalty": self.penalty,
            "C": self.C,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "fit_intercept": self.fit_intercept,
            "standard_scale": self.standard_scale,
        }


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"  # gini | entropy
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    ccp_alpha: float = 0.0
    max_features: str = "all"  # all | sqrt | log2
    seed: Optional[int] = None

    def __post_init__(self):
        if self.criterion not in ("gini", "entropy"):
            raise ValueError(f"bad criterion {self.criterion!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2 or self.min_samples_leaf < 1 or self.ccp_alpha < 0:
            raise ValueError("tree hyperparameters out of range")
        if self.max_features not in ("all", "sqrt", "log2"):
            raise ValueError(f"bad max_features {self.max_features!r}")

    def to_json(self):
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "ccp_alpha": self.ccp_alpha,
            "max_features": self.max_features,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ForestParams:
    criterion: str = "gini"
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    ccp_alpha: float = 0.0
    max_features: str = "all"
    n_estimators: int = 50
    bootstrap: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        TreeParams(
            criterion=self.criterion,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            ccp_alpha=self.ccp_alpha,
            max_features=self.max_features,
        )
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")

    def tree_params(self):
        return TreeParams(
            criterion=self.criterion,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            ccp_alpha=self.ccp_alpha,
            max_features=self.max_features,
        )

    def to_json(self):
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "ccp_alpha": self.ccp_alpha,
            "max_features": self.max_features,
            "n_estimators": self.n_estimators,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SVMParams:
    C: float = 1.0
    tol: float = 1e-3
    max_iter: int = 500
    standard_scale: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        if self.C <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("SVM hyperparameters out of range")

    def to_json(self):
        return {
            "C": self.C,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "standard_scale": self.standard_scale,
            "seed": self.seed,
        }


_PARAM_CLASSES = {
    LOGISTIC_REGRESSION: LRParams,
    DECISION_TREE: TreeParams,
    RANDOM_FOREST: ForestParams,
    LINEAR_SVM: SVMParams,
}


def params_from_json(kind, obj):
    cls = _PARAM_CLASSES[kind]
    return cls(**obj)


def default_params(kind):
    return _PARAM_CLASSES[kind]()


def effective_seed(hp, seed):
    hp_seed = getattr(hp, "seed", None)
    return int(hp_seed) if hp_seed is not None else int(seed)


def train(kind, hp, ds, seed):
    """Train a model of ``kind`` on the dataset. Deterministic for fixed
    (kind, hp, ds, seed); hp.seed overrides ``seed`` when present."""
    if not isinstance(hp, _PARAM_CLASSES[kind]):
        raise TypeError(f"hyperparams {type(hp).__name__} do not match kind {kind}")
    X = ds.matrix
    y = ds.labels
    eff = effective_seed(hp, seed)
    stds = X.std(axis=0)

    if kind == LOGISTIC_REGRESSION or kind == LINEAR_SVM:
        if len(np.unique(y)) < 2:
            raise SingleClassData("training labels contain a single class")
        scaler = Scaler.fit(X) if hp.standard_scale else None
        Xt = scaler.transform(X) if scaler is not None else X
        if kind == LOGISTIC_REGRESSION:
            w, b, converged = train_logistic(Xt, y, hp)
            calibration = None
        else:
            w, b, converged = train_svm_raw(Xt, y, hp.C, hp.tol, hp.max_iter)
            calibration = calibrate_svm(Xt, y, hp, eff)
        return LinearModel(
            kind=kind,
            hyperparams=hp,
            weights=w,
            bias=b,
            scaler=scaler,
            feature_stds=stds,
            converged=converged,
            train_seed=eff,
            calibration=calibration,
        )
    if kind == DECISION_TREE:
        return train_tree(X, y, hp, eff)
    if kind == RANDOM_FOREST:
        return train_forest(X, y, hp, eff)
    raise ValueError(f"unknown model kind {kind!r}")


def predict_proba_batch(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected (*, {model.n_features}) feature matrix, got {X.shape}"
        )
    return model.predict_proba_batch(X)


def predict_proba(model, row):
    """Positive-class probability in [0, 1] for one feature vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or len(row) != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got shape {row.shape}")
    return float(model.predict_proba_batch(row[None, :])[0])


def predict_batch(model, X, threshold=0.5):
    return (predict_proba_batch(model, X) >= threshold).astype(np.int64)


def predict(model, row, threshold=0.5):
    """Class in {0, 1}; probability at the threshold maps to class 1."""
    return int(predict_proba(model, row) >= threshold)


def accuracy(model, ds):
    preds = predict_batch(model, ds.matrix)
    return float(np.mean(preds == ds.labels))


def model_state(model):
    return model.to_state()


def model_from_state(state):
    kind = state["kind"]
    hp = params_from_json(kind, state["hyperparams"])
    if kind in (LOGISTIC_REGRESSION, LINEAR_SVM):
        scaler = None
        if state["scaler"] is not None:
            scaler = Scaler(
                mean=np.array(state["scaler"]["mean"], dtype=np.float64),
                std=np.array(state["scaler"]["std"], dtype=np.float64),
            )
        calibration = None
        if state.get("calibration") is not None:
            cal = state["calibration"]
            calibration = (cal["a"], cal["b"], cal["source"])
        return LinearModel(
            kind=kind,
            hyperparams=hp,
            weights=np.array(state["weights"], dtype=np.float64),
            bias=float(state["bias"]),
            scaler=scaler,
            feature_stds=np.array(state["feature_stds"], dtype=np.float64),
            converged=bool(state["converged"]),
            train_seed=int(state["train_seed"]),
            calibration=calibration,
        )
    if kind == DECISION_TREE:
        return TreeModel(
            kind=kind,
            hyperparams=hp,
            root=tree_from_flat(state["nodes"]),
            n_features=int(state["n_features"]),
            train_seed=int(state["train_seed"]),
        )
    if kind == RANDOM_FOREST:
        trees = [
            TreeModel(
                kind=DECISION_TREE,
                hyperparams=hp.tree_params(),
                root=tree_from_flat(nodes),
                n_features=int(state["n_features"]),
                train_seed=int(state["train_seed"]),
            )
            for nodes in state["trees"]
        ]
        return ForestModel(
            kind=kind,
            hyperparams=hp,
            trees=trees,
            n_features=int(state["n_features"]),
            train_seed=int(state["train_seed"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")
