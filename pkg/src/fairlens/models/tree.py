"""CART decision trees and bootstrap random forests, from scratch.

Trees split on ``x <= threshold`` with thresholds midway between
consecutive distinct sorted values, exhaustively searched. Impure nodes
split as long as a valid split exists (zero-gain splits are allowed so
conflict-free data is always fit exactly); ties are broken by lowest
feature index, then lowest threshold. Cost-complexity pruning follows
the usual weakest-link recursion on the training criterion.

All structural traversals are iterative: adversarial tie-breaking can
produce trees whose depth is linear in the sample count.
"""

import math
from dataclasses import dataclass
from typing import List, Union

import numpy as np

from ..seeding import generator, split_seed


@dataclass
class Leaf:
    n: int
    n_pos: int

    @property
    def positive_fraction(self):
        return self.n_pos / self.n if self.n else 0.5

    @property
    def klass(self):
        return 1 if self.positive_fraction >= 0.5 else 0

    @property
    def confidence(self):
        """Fraction of the leaf's training points sharing its class."""
        p = self.positive_fraction
        return p if self.klass == 1 else 1.0 - p


@dataclass
class Node:
    feature: int
    threshold: float
    left: Union["Node", Leaf]
    right: Union["Node", Leaf]
    n: int
    n_pos: int


def _impurity(n_pos, n, criterion):
    if n == 0:
        return 0.0
    p = n_pos / n
    if p == 0.0 or p == 1.0:
        return 0.0
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def _impurity_vec(n_pos, n, criterion):
    p = n_pos / n
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    q = 1.0 - p
    ent = np.zeros_like(p)
    mask = (p > 0) & (p < 1)
    ent[mask] = -(p[mask] * np.log2(p[mask]) + q[mask] * np.log2(q[mask]))
    return ent


def _n_candidates(max_features, d):
    if max_features == "sqrt":
        return max(1, int(math.sqrt(d)))
    if max_features == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    return d


def _best_split(X, y, idx, candidates, criterion, min_samples_leaf):
    """Best (feature, threshold) by weighted child impurity, or None."""
    n = len(idx)
    best = None  # (weighted_impurity, feature, threshold)
    for j in candidates:
        col = X[idx, j]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y[idx][order]
        boundary = np.nonzero(xs[1:] != xs[:-1])[0]  # split after position i
        if len(boundary) == 0:
            continue
        pos_prefix = np.cumsum(ys)
        n_left = boundary + 1
        n_right = n - n_left
        valid = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not valid.any():
            continue
        n_left = n_left[valid]
        n_right = n_right[valid]
        cut = boundary[valid]
        pos_left = pos_prefix[cut]
        pos_right = pos_prefix[-1] - pos_left
        weighted = (
            n_left * _impurity_vec(pos_left, n_left, criterion)
            + n_right * _impurity_vec(pos_right, n_right, criterion)
        ) / n
        k = int(np.argmin(weighted))  # first minimum -> lowest threshold
        score = float(weighted[k])
        if best is None or score < best[0] - 1e-12:
            threshold = 0.5 * (xs[cut[k]] + xs[cut[k] + 1])
            best = (score, int(j), float(threshold))
    if best is None:
        return None
    return best[1], best[2]


def _grow(X, y, hp, rng):
    """Iterative DFS construction; candidate features are drawn per node
    in preorder (left subtree before right) so seeds replay exactly."""
    d = X.shape[1]
    m = _n_candidates(hp.max_features, d)
    root_box = [None]
    stack = [(np.arange(len(y)), 0, root_box, 0)]
    while stack:
        idx, depth, box, slot = stack.pop()
        n = len(idx)
        n_pos = int(y[idx].sum())
        splittable = (
            0 < n_pos < n
            and n >= hp.min_samples_split
            and n >= 2 * hp.min_samples_leaf
            and (hp.max_depth is None or depth < hp.max_depth)
        )
        found = None
        if splittable:
            if m < d:
                candidates = np.sort(rng.choice(d, size=m, replace=False))
            else:
                candidates = np.arange(d)
            found = _best_split(X, y, idx, candidates, hp.criterion, hp.min_samples_leaf)
        if found is None:
            box[slot] = Leaf(n=n, n_pos=n_pos)
            continue
        feature, threshold = found
        node = Node(feature=feature, threshold=threshold, left=None, right=None, n=n, n_pos=n_pos)
        box[slot] = node
        go_left = X[idx, feature] <= threshold
        # push right first so the left child is built first (LIFO)
        stack.append((idx[~go_left], depth + 1, _NodeSlot(node, "right"), 0))
        stack.append((idx[go_left], depth + 1, _NodeSlot(node, "left"), 0))
    return root_box[0]


class _NodeSlot:
    """Adapter letting the grow stack assign node children by name."""

    __slots__ = ("node", "side")

    def __init__(self, node, side):
        self.node = node
        self.side = side

    def __setitem__(self, _slot, value):
        setattr(self.node, self.side, value)


def _iter_nodes(root):
    """(node, parent, side) triples in preorder."""
    out = []
    stack = [(root, None, None)]
    while stack:
        node, parent, side = stack.pop()
        out.append((node, parent, side))
        if isinstance(node, Node):
            stack.append((node.right, node, "right"))
            stack.append((node.left, node, "left"))
    return out


def _prune(root, n_total, criterion, ccp_alpha):
    """Weakest-link pruning: collapse internal nodes while the cheapest
    effective alpha stays at or below ccp_alpha."""
    if ccp_alpha <= 0.0 or isinstance(root, Leaf):
        return root

    while isinstance(root, Node):
        triples = _iter_nodes(root)
        # bottom-up subtree stats: (n_leaves, subtree_leaf_risk)
        stats = {}
        for node, _, _ in reversed(triples):
            if isinstance(node, Leaf):
                stats[id(node)] = (1, (node.n / n_total) * _impurity(node.n_pos, node.n, criterion))
            else:
                ll, lr = stats[id(node.left)]
                rl, rr = stats[id(node.right)]
                stats[id(node)] = (ll + rl, lr + rr)
        best = None  # (alpha, preorder_rank, node, parent, side)
        for rank, (node, parent, side) in enumerate(triples):
            if isinstance(node, Leaf):
                continue
            n_leaves, subtree_risk = stats[id(node)]
            own_risk = (node.n / n_total) * _impurity(node.n_pos, node.n, criterion)
            alpha = (own_risk - subtree_risk) / max(n_leaves - 1, 1)
            if best is None or alpha < best[0] - 1e-15:
                best = (alpha, rank, node, parent, side)
        alpha, _, node, parent, side = best
        if alpha > ccp_alpha:
            break
        leaf = Leaf(n=node.n, n_pos=node.n_pos)
        if parent is None:
            root = leaf
        else:
            setattr(parent, side, leaf)
    return root


@dataclass
class TreeModel:
    kind: str
    hyperparams: object
    root: Union[Node, Leaf]
    n_features: int
    train_seed: int

    def predict_proba_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X))
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if len(idx) == 0:
                continue
            if isinstance(node, Leaf):
                out[idx] = node.positive_fraction
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    @property
    def max_depth_actual(self):
        deepest = 0
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            deepest = max(deepest, depth)
            if isinstance(node, Node):
                stack.append((node.left, depth + 1))
                stack.append((node.right, depth + 1))
        return deepest

    def to_state(self):
        return {
            "kind": self.kind,
            "hyperparams": self.hyperparams.to_json(),
            "n_features": self.n_features,
            "train_seed": int(self.train_seed),
            "nodes": flatten_tree(self.root),
        }


def flatten_tree(root):
    """Flatten to a list of node records; children referenced by index,
    index 0 is the root. Keeps stored JSON nesting-free."""
    nodes = []
    stack = [(root, None, None)]
    while stack:
        node, parent_ix, side = stack.pop()
        ix = len(nodes)
        if isinstance(node, Leaf):
            nodes.append({"n": node.n, "n_pos": node.n_pos})
        else:
            nodes.append(
                {
                    "feature": node.feature,
                    "threshold": float(node.threshold),
                    "n": node.n,
                    "n_pos": node.n_pos,
                    "left": -1,
                    "right": -1,
                }
            )
        if parent_ix is not None:
            nodes[parent_ix][side] = ix
        if isinstance(node, Node):
            stack.append((node.right, ix, "right"))
            stack.append((node.left, ix, "left"))
    return nodes


def tree_from_flat(nodes):
    objs = []
    for rec in nodes:
        if "feature" in rec:
            objs.append(
                Node(
                    feature=rec["feature"],
                    threshold=rec["threshold"],
                    left=None,
                    right=None,
                    n=rec["n"],
                    n_pos=rec["n_pos"],
                )
            )
        else:
            objs.append(Leaf(n=rec["n"], n_pos=rec["n_pos"]))
    for rec, obj in zip(nodes, objs):
        if "feature" in rec:
            obj.left = objs[rec["left"]]
            obj.right = objs[rec["right"]]
    return objs[0]


def train_tree(X, y, hp, seed, kind="DecisionTree"):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rng = generator(seed)
    root = _grow(X, y, hp, rng)
    root = _prune(root, len(y), hp.criterion, hp.ccp_alpha)
    return TreeModel(kind=kind, hyperparams=hp, root=root, n_features=X.shape[1], train_seed=seed)


@dataclass
class ForestModel:
    kind: str
    hyperparams: object
    trees: List[TreeModel]
    n_features: int
    train_seed: int

    def predict_proba_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict_proba_batch(X)
        return total / len(self.trees)

    def to_state(self):
        return {
            "kind": self.kind,
            "hyperparams": self.hyperparams.to_json(),
            "n_features": self.n_features,
            "train_seed": int(self.train_seed),
            "trees": [flatten_tree(t.root) for t in self.trees],
        }


def forest_tree_seed(seed, i):
    """Seed for the i-th tree of a forest trained with ``seed``."""
    return split_seed(seed, "tree", i)


def train_forest(X, y, hp, seed):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    tree_hp = hp.tree_params()
    trees = []
    for i in range(hp.n_estimators):
        if hp.bootstrap:
            boot_rng = generator(split_seed(seed, "bootstrap", i))
            idx = boot_rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(train_tree(X[idx], y[idx], tree_hp, forest_tree_seed(seed, i)))
    return ForestModel(
        kind="RandomForest", hyperparams=hp, trees=trees, n_features=X.shape[1], train_seed=seed
    )
