"""Human-readable model logic: weight tables and serialized trees.

Linear models report raw weights alongside weights multiplied by the
training column's standard deviation (captured at train time, never
re-estimated), so a small weight on a high-variance column is ranked by
its actual pull on the decision. Trees serialize to nested dicts down
to a display depth; anything deeper collapses into a summary record.
"""

from dataclasses import dataclass
from typing import List, Optional

from .tree import Leaf


@dataclass(frozen=True)
class WeightEntry:
    feature: str
    raw: float
    adjusted: float  # raw * training std of the column


@dataclass(frozen=True)
class ModelLogic:
    kind: str
    weights: Optional[List[WeightEntry]] = None
    intercept: Optional[float] = None
    trees: Optional[list] = None  # one dict per displayed tree

    def to_json(self):
        out = {"kind": self.kind}
        if self.weights is not None:
            out["weights"] = [
                {"feature": e.feature, "raw": e.raw, "adjusted": e.adjusted}
                for e in self.weights
            ]
            out["intercept"] = self.intercept
        if self.trees is not None:
            out["trees"] = self.trees
        return out


def _leaf_json(n, n_pos, truncated=False):
    p = n_pos / n if n else 0.5
    klass = 1 if p >= 0.5 else 0
    rec = {
        "class": klass,
        "confidence": p if klass == 1 else 1.0 - p,
        "positive_fraction": p,
        "n": n,
    }
    if truncated:
        rec["truncated"] = True
    return rec


def tree_to_display(root, feature_names, display_depth=None):
    """Nested dict form of a tree, truncated at display_depth levels of
    internal nodes; truncated subtrees become summary leaves."""
    out = {}
    stack = [(root, 0, out)]
    while stack:
        node, depth, slot = stack.pop()
        if isinstance(node, Leaf):
            slot.update(_leaf_json(node.n, node.n_pos))
            continue
        if display_depth is not None and depth >= display_depth:
            slot.update(_leaf_json(node.n, node.n_pos, truncated=True))
            continue
        left, right = {}, {}
        slot.update(
            {
                "feature": feature_names[node.feature],
                "feature_index": node.feature,
                "threshold": node.threshold,
                "n": node.n,
                "left": left,
                "right": right,
            }
        )
        stack.append((node.left, depth + 1, left))
        stack.append((node.right, depth + 1, right))
    return out


def export_logic(model, feature_names, display_depth=None):
    kind = model.kind
    if kind in ("LogisticRegression", "LinearSVM"):
        entries = [
            WeightEntry(
                feature=feature_names[i],
                raw=float(model.weights[i]),
                adjusted=float(model.weights[i]) * float(model.feature_stds[i]),
            )
            for i in range(len(model.weights))
        ]
        return ModelLogic(kind=kind, weights=entries, intercept=float(model.bias))
    if kind == "DecisionTree":
        return ModelLogic(
            kind=kind, trees=[tree_to_display(model.root, feature_names, display_depth)]
        )
    if kind == "RandomForest":
        return ModelLogic(
            kind=kind,
            trees=[
                tree_to_display(t.root, feature_names, display_depth) for t in model.trees
            ],
        )
    raise ValueError(f"unknown model kind {kind!r}")
