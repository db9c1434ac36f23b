"""Local surrogate explanations of model confidence at a point.

The pipeline mirrors the classic local-surrogate recipe for tabular
data: map the instance into binary "interpretable" features (category
match / quartile-bin match), perturb by resampling from the training
marginals, weight perturbations by proximity in the binary space, fit
a weighted ridge regression to the model's positive-class probability,
and keep the strongest features by greedy forward selection. Weights
are therefore in probability units of the positive class.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import metrics, models
from .dataset import CATEGORICAL
from .seeding import generator, split_seed

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class PerturbationConfig:
    n_samples: int = 5000
    kernel_width: Optional[float] = None  # default 0.75 * sqrt(n_features)
    top_k: int = 10
    seed: int = 0
    ridge: float = 1.0

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError("n_samples must be >= 10")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")

    def width_for(self, n_features):
        if self.kernel_width is not None:
            return self.kernel_width
        return 0.75 * np.sqrt(n_features)


@dataclass(frozen=True)
class ExplanationEntry:
    feature: str
    condition: str
    weight: float


@dataclass(frozen=True)
class Explanation:
    entries: Tuple[ExplanationEntry, ...]
    intercept: float
    local_prediction: float
    fidelity_r2: float
    degenerate: bool = False

    def weight_of(self, feature):
        for e in self.entries:
            if e.feature == feature:
                return e.weight
        return 0.0

    def to_json(self):
        return {
            "entries": [
                {"feature": e.feature, "condition": e.condition, "weight": e.weight}
                for e in self.entries
            ],
            "intercept": self.intercept,
            "local_prediction": self.local_prediction,
            "fidelity_r2": self.fidelity_r2,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class InterpretableSpace:
    """Binary view of the feature space around one instance."""

    feature_names: Tuple[str, ...]
    kinds: Tuple[str, ...]
    instance_codes: np.ndarray  # category code or quartile bin per feature
    quartiles: Tuple[Optional[np.ndarray], ...]
    conditions: Tuple[str, ...]

    def bin_of(self, j, values):
        q = self.quartiles[j]
        return np.searchsorted(q, values, side="left")

    def binary_matrix(self, X):
        """Indicator of agreeing with the instance, feature by feature."""
        n = len(X)
        Z = np.empty((n, len(self.feature_names)))
        for j, kind in enumerate(self.kinds):
            if kind == CATEGORICAL:
                Z[:, j] = X[:, j] == self.instance_codes[j]
            else:
                Z[:, j] = self.bin_of(j, X[:, j]) == self.instance_codes[j]
        return Z


def _quartile_condition(name, q, bin_ix):
    lo = None if bin_ix == 0 else q[bin_ix - 1]
    hi = None if bin_ix == len(q) else q[bin_ix]
    if lo is None:
        return f"{name} <= {hi:g}"
    if hi is None:
        return f"{name} > {lo:g}"
    return f"{lo:g} < {name} <= {hi:g}"


def make_interpretable(instance, ds):
    """Binary feature map for an instance: per-feature indicators of
    'same category' (categorical) or 'same training quartile bin'
    (numerical), with display conditions."""
    instance = np.asarray(instance, dtype=np.float64)
    names = []
    kinds = []
    codes = np.empty(ds.schema.n_features)
    quartiles = []
    conditions = []
    for j, feat in enumerate(ds.schema.features):
        names.append(feat.name)
        kinds.append(feat.kind)
        if feat.kind == CATEGORICAL:
            code = int(instance[j])
            codes[j] = code
            quartiles.append(None)
            conditions.append(f"{feat.name} = {feat.categories[code]}")
        else:
            col = ds.matrix[:, j]
            q = np.unique(np.percentile(col, [25, 50, 75]))
            bin_ix = int(np.searchsorted(q, instance[j], side="left"))
            codes[j] = bin_ix
            quartiles.append(q)
            conditions.append(_quartile_condition(feat.name, q, bin_ix))
    return InterpretableSpace(
        feature_names=tuple(names),
        kinds=tuple(kinds),
        instance_codes=codes,
        quartiles=tuple(quartiles),
        conditions=tuple(conditions),
    )


def perturb(instance, ds, cfg, space=None):
    """(raw rows, binary rows, distances); the first row is the instance.

    Categorical cells resample from the training marginals; numerical
    cells draw from a normal with the column's training mean and std.
    Distance is 1 - (fraction of matching indicators).
    """
    instance = np.asarray(instance, dtype=np.float64)
    if space is None:
        space = make_interpretable(instance, ds)
    rng = generator(split_seed(cfg.seed, "perturb"))
    n = cfg.n_samples
    d = ds.schema.n_features
    raw = np.empty((n, d))
    raw[0] = instance
    if n > 1:
        for j, feat in enumerate(ds.schema.features):
            col = ds.matrix[:, j]
            if feat.kind == CATEGORICAL:
                codes, counts = np.unique(col, return_counts=True)
                raw[1:, j] = rng.choice(codes, size=n - 1, p=counts / counts.sum())
            else:
                std = float(col.std())
                raw[1:, j] = rng.normal(float(col.mean()), std, size=n - 1) if std > 0 else col[0]
    Z = space.binary_matrix(raw)
    distances = 1.0 - Z.mean(axis=1)
    return raw, Z, distances


def _fit_subset(subset, G, c, col_sums, sw, sy, ridge):
    """Weighted ridge on the chosen columns with a free intercept.

    Solves [[sw, s^T], [s, G_SS + ridge I]] [b0, b] = [sy, c_S].
    """
    k = len(subset)
    A = np.empty((k + 1, k + 1))
    A[0, 0] = sw
    A[0, 1:] = col_sums[subset]
    A[1:, 0] = col_sums[subset]
    A[1:, 1:] = G[np.ix_(subset, subset)] + ridge * np.eye(k)
    rhs = np.concatenate([[sy], c[subset]])
    sol = np.linalg.solve(A, rhs)
    return sol[0], sol[1:]


def _ss_res(subset, beta0, beta, G, c, col_sums, sw, sy, syy):
    """Weighted residual sum of squares from the precomputed moments."""
    b = np.concatenate([[beta0], beta])
    rhs = np.concatenate([[sy], c[subset]])
    M = np.empty((len(subset) + 1, len(subset) + 1))
    M[0, 0] = sw
    M[0, 1:] = col_sums[subset]
    M[1:, 0] = col_sums[subset]
    M[1:, 1:] = G[np.ix_(subset, subset)]
    return float(syy - 2.0 * b @ rhs + b @ M @ b)


def explain_point(model, instance, ds, cfg=None):
    """Weighted-ridge local surrogate of predict_proba around an instance."""
    if cfg is None:
        cfg = PerturbationConfig()
    instance = np.asarray(instance, dtype=np.float64)
    space = make_interpretable(instance, ds)
    raw, Z, distances = perturb(instance, ds, cfg, space)
    y = models.predict_proba_batch(model, raw)
    width = cfg.width_for(ds.schema.n_features)
    pi = np.exp(-(distances**2) / (width**2))

    sw = float(pi.sum())
    sy = float(pi @ y)
    syy = float(pi @ (y * y))
    if float(y.max() - y.min()) < _DEGENERATE_EPS:
        mean = sy / sw
        return Explanation(
            entries=(),
            intercept=mean,
            local_prediction=min(1.0, max(0.0, mean)),
            fidelity_r2=0.0,
            degenerate=True,
        )

    Zp = Z * pi[:, None]
    G = Z.T @ Zp
    c = Z.T @ (pi * y)
    col_sums = Zp.sum(axis=0)

    d = Z.shape[1]
    k = min(cfg.top_k, d)
    selected: List[int] = []
    remaining = list(range(d))
    for _ in range(k):
        best = None
        for j in remaining:
            trial = selected + [j]
            beta0, beta = _fit_subset(trial, G, c, col_sums, sw, sy, cfg.ridge)
            ss = _ss_res(trial, beta0, beta, G, c, col_sums, sw, sy, syy)
            if best is None or ss < best[0] - 1e-15:
                best = (ss, j)
        selected.append(best[1])
        remaining.remove(best[1])

    beta0, beta = _fit_subset(selected, G, c, col_sums, sw, sy, cfg.ridge)
    ss_res = _ss_res(selected, beta0, beta, G, c, col_sums, sw, sy, syy)
    ss_tot = syy - sy * sy / sw
    fidelity = 1.0 - ss_res / ss_tot if ss_tot > _DEGENERATE_EPS else 0.0

    order = sorted(range(len(selected)), key=lambda i: (-abs(beta[i]), selected[i]))
    entries = tuple(
        ExplanationEntry(
            feature=space.feature_names[selected[i]],
            condition=space.conditions[selected[i]],
            weight=float(beta[i]),
        )
        for i in order
    )
    local = beta0 + float(beta.sum())  # instance indicators are all 1
    return Explanation(
        entries=entries,
        intercept=float(beta0),
        local_prediction=min(1.0, max(0.0, local)),
        fidelity_r2=float(fidelity),
        degenerate=False,
    )


@dataclass(frozen=True)
class CounterfactualSample:
    indices: np.ndarray
    rows: np.ndarray
    shortfall: bool


def sample_counterfactual_points(model, ds, spec, k=15, seed=0):
    """Uniform sample without replacement from the counterfactual set;
    returns everything (with a shortfall flag) when fewer than k exist."""
    cf = metrics.counterfactual_set(model, ds, spec)
    if len(cf) <= k:
        indices = cf
        shortfall = len(cf) < k
    else:
        rng = generator(split_seed(seed, "cf-sample"))
        indices = np.sort(rng.choice(cf, size=k, replace=False))
        shortfall = False
    return CounterfactualSample(
        indices=indices, rows=ds.matrix[indices].copy(), shortfall=shortfall
    )


def aggregate_importance(model, rows, ds, cfg=None):
    """Mean absolute surrogate weight per feature over the given rows,
    sorted descending; features never selected count as zero."""
    if cfg is None:
        cfg = PerturbationConfig()
    rows = np.asarray(rows, dtype=np.float64)
    names = ds.schema.feature_names
    totals = dict.fromkeys(names, 0.0)
    for i in range(len(rows)):
        row_cfg = PerturbationConfig(
            n_samples=cfg.n_samples,
            kernel_width=cfg.kernel_width,
            top_k=cfg.top_k,
            seed=split_seed(cfg.seed, "aggregate", i),
            ridge=cfg.ridge,
        )
        explanation = explain_point(model, rows[i], ds, row_cfg)
        for entry in explanation.entries:
            totals[entry.feature] += abs(entry.weight)
    n = max(len(rows), 1)
    ranked = sorted(names, key=lambda f: (-totals[f] / n, names.index(f)))
    return [(f, totals[f] / n) for f in ranked]
