import numpy as np
import pytest

from fairlens.dataset import (
    Dataset,
    DatasetSchema,
    FeatureSchema,
    GroupRule,
    LabelSchema,
    SensitiveSpec,
)


def build_dataset(X, y, kinds=None, dataset_id="toy", names=None, categories=None):
    """Dataset from raw arrays; kinds[j] in {'num', 'cat'}."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    kinds = kinds or ["num"] * d
    names = names or [f"f{j}" for j in range(d)]
    feats = []
    for j in range(d):
        if kinds[j] == "cat":
            if categories and categories.get(names[j]):
                cats = tuple(categories[names[j]])
            else:
                cats = tuple(f"c{i}" for i in range(int(X[:, j].max()) + 1))
            feats.append(FeatureSchema(name=names[j], kind="categorical", categories=cats))
        else:
            feats.append(FeatureSchema(name=names[j], kind="numerical"))
    schema = DatasetSchema(
        dataset_id=dataset_id,
        features=tuple(feats),
        label=LabelSchema("label", "pos", "neg"),
    )
    return Dataset(schema=schema, matrix=X, labels=np.asarray(y, dtype=np.int64))


def categorical_spec(feature="s", labels=("group 0", "group 1")):
    return SensitiveSpec(
        feature_name=feature,
        group0_rule=GroupRule(categories=(0,)),
        group1_rule=GroupRule(categories=(1,)),
        group_labels=labels,
    )


def make_proxy_dataset(n=2000, seed=123, mu=0.5, noise=0.0, dataset_id="proxy"):
    """Synthetic remedy benchmark: x1 identifies the sensitive group,
    x2 is shifted by group, and the label depends only on x2 (a hard
    threshold, optionally flipped with probability ``noise``)."""
    rng = np.random.default_rng(seed)
    g = rng.integers(0, 2, size=n)
    x2 = rng.normal(0.0, 1.0, size=n) + mu * (2 * g - 1)
    y = (x2 > 0).astype(np.int64)
    if noise > 0:
        flip = rng.uniform(size=n) < noise
        y = np.where(flip, 1 - y, y)
    X = np.column_stack([g.astype(np.float64), x2])
    return build_dataset(
        X,
        y,
        kinds=["cat", "num"],
        names=["x1", "x2"],
        dataset_id=dataset_id,
        categories={"x1": ["A", "B"]},
    )


def proxy_spec():
    return SensitiveSpec(
        feature_name="x1",
        group0_rule=GroupRule(categories=(0,)),
        group1_rule=GroupRule(categories=(1,)),
        group_labels=("A", "B"),
    )


class StubModel:
    """Duck-typed model for metric tests: any row -> probability fn."""

    def __init__(self, fn, n_features):
        self.fn = fn
        self.n_features = n_features
        self.kind = "Stub"

    def predict_proba_batch(self, X):
        return np.asarray([self.fn(row) for row in np.asarray(X, dtype=np.float64)])


@pytest.fixture
def toy_separable():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    y = (X[:, 0] - 0.5 * X[:, 2] > 0).astype(np.int64)
    return build_dataset(X, y)


@pytest.fixture
def proxy_dataset():
    return make_proxy_dataset()
