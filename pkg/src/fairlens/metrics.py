"""Group confusion statistics, rate gaps, and counterfactual fairness.

Positive means class 1 throughout. Group 0 plays the role of the first
sensitive category in the signed formulas:

    aod    = ((fpr0 - fpr1) + (tpr1 - tpr0)) / 2
    group  = (posfrac0 - posfrac1) / 2

Signed values can be negative; comparisons and rankings elsewhere in
the package use the absolute values.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import models
from .dataset import EXCLUDED, assign_groups
from .errors import LengthMismatch, NoMembers, UndefinedRate


@dataclass(frozen=True)
class GroupConfusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class RatePair:
    tpr: Optional[float]  # None when tp + fn == 0
    fpr: Optional[float]  # None when fp + tn == 0


@dataclass(frozen=True)
class FairnessReport:
    accuracy: float
    aod_signed: float
    aod: float
    group_discrimination_signed: float
    group_discrimination: float
    causal_discrimination: float
    counterfactual_count: int
    n_evaluated: int

    def to_json(self):
        """Exactly the report table's column names, plus signed variants."""
        return {
            "score": self.accuracy,
            "AOD": self.aod,
            "AOD_signed": self.aod_signed,
            "group_score": self.group_discrimination,
            "group_score_signed": self.group_discrimination_signed,
            "causal_score": self.causal_discrimination,
        }


def _as_vec(x, name):
    v = np.asarray(x)
    if v.ndim != 1:
        raise LengthMismatch(f"{name} must be 1-D")
    return v


def group_confusion(preds, labels, groups):
    """Confusion counts per sensitive group; excluded rows are ignored."""
    preds = _as_vec(preds, "preds")
    labels = _as_vec(labels, "labels")
    groups = _as_vec(groups, "groups")
    if not (len(preds) == len(labels) == len(groups)):
        raise LengthMismatch(
            f"preds({len(preds)}), labels({len(labels)}), groups({len(groups)})"
        )
    out = []
    for g in (0, 1):
        sel = groups == g
        if not sel.any():
            raise NoMembers(g)
        p = preds[sel]
        y = labels[sel]
        out.append(
            GroupConfusion(
                tp=int(((p == 1) & (y == 1)).sum()),
                fp=int(((p == 1) & (y == 0)).sum()),
                fn=int(((p == 0) & (y == 1)).sum()),
                tn=int(((p == 0) & (y == 0)).sum()),
            )
        )
    return out[0], out[1]


def rates(c):
    """TPR = tp/(tp+fn), FPR = fp/(fp+tn); undefined parts are None."""
    tpr = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    fpr = c.fp / (c.fp + c.tn) if (c.fp + c.tn) > 0 else None
    return RatePair(tpr=tpr, fpr=fpr)


def aod(c0, c1):
    """Signed average odds difference between the two groups."""
    r0 = rates(c0)
    r1 = rates(c1)
    if r0.tpr is None or r0.fpr is None or r1.tpr is None or r1.fpr is None:
        raise UndefinedRate("a group has no positives or no negatives")
    return ((r0.fpr - r1.fpr) + (r1.tpr - r0.tpr)) / 2.0


def group_discrimination(preds, groups):
    """Signed half-difference of positive-classification fractions."""
    preds = _as_vec(preds, "preds")
    groups = _as_vec(groups, "groups")
    if len(preds) != len(groups):
        raise LengthMismatch(f"preds({len(preds)}), groups({len(groups)})")
    fracs = []
    for g in (0, 1):
        sel = groups == g
        if not sel.any():
            raise NoMembers(g)
        fracs.append(float((preds[sel] == 1).mean()))
    return (fracs[0] - fracs[1]) / 2.0


def flip_sensitive(ds, spec, groups=None):
    """Copy of the feature matrix with each in-group row's sensitive cell
    flipped to the opposite group's canonical value.

    Categorical rules flip to the first code of the opposite rule;
    numeric rules flip to the midpoint of the opposite range, clamped
    to the observed column range when an endpoint is unbounded.
    """
    if groups is None:
        groups = assign_groups(ds, spec)
    j = ds.schema.feature_index(spec.feature_name)
    col = ds.matrix[:, j]
    lo, hi = float(col.min()), float(col.max())
    to_group1 = spec.group1_rule.canonical_value(lo, hi)
    to_group0 = spec.group0_rule.canonical_value(lo, hi)
    flipped = ds.matrix.copy()
    flipped[groups == 0, j] = to_group1
    flipped[groups == 1, j] = to_group0
    return flipped


def counterfactual_set(model, ds, spec):
    """Indices whose predicted class changes under the sensitive flip.

    Rows outside both groups are skipped.
    """
    groups = assign_groups(ds, spec)
    flipped = flip_sensitive(ds, spec, groups)
    before = models.predict_batch(model, ds.matrix)
    after = models.predict_batch(model, flipped)
    hit = (before != after) & (groups != EXCLUDED)
    return np.nonzero(hit)[0]


def causal_discrimination(model, ds, spec):
    """Fraction of the in-group rows that are counterfactuals."""
    groups = assign_groups(ds, spec)
    n_eval = int((groups != EXCLUDED).sum())
    cf = counterfactual_set(model, ds, spec)
    return len(cf) / n_eval


def fairness_report(model, ds, spec):
    """Aggregate accuracy + fairness scores for one model on one dataset.

    Accuracy covers every row; fairness statistics cover only rows in a
    sensitive group.
    """
    groups = assign_groups(ds, spec)
    preds = models.predict_batch(model, ds.matrix)
    acc = float(np.mean(preds == ds.labels))
    c0, c1 = group_confusion(preds, ds.labels, groups)
    aod_signed = aod(c0, c1)
    group_signed = group_discrimination(preds, groups)
    cf = counterfactual_set(model, ds, spec)
    n_eval = int((groups != EXCLUDED).sum())
    return FairnessReport(
        accuracy=acc,
        aod_signed=aod_signed,
        aod=abs(aod_signed),
        group_discrimination_signed=group_signed,
        group_discrimination=abs(group_signed),
        causal_discrimination=len(cf) / n_eval,
        counterfactual_count=len(cf),
        n_evaluated=n_eval,
    )
