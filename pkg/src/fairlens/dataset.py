"""Tabular datasets with declared schemas, sensitive groups, and masking.

Categorical columns are stored as integer codes (the code is the index
of the category name in the schema's declaration order); numerical
columns are stored as floats. Labels are binary 0/1. Datasets are
immutable after load and all operations here are pure.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import (
    EmptyDataset,
    InvalidMask,
    MissingColumn,
    NoMembers,
    NonNumericCell,
    UnknownCategory,
)

NUMERICAL = "numerical"
CATEGORICAL = "categorical"

#: group vector value for rows matching neither sensitive rule
EXCLUDED = -1

#: category name appended to a schema when a categorical feature is masked
MASKED_CATEGORY = "__masked__"

#: number of equal-width bins used to summarize numerical features
N_BINS = 10


# ---------------------------------------------------------------------------
# schema types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    kind: str
    categories: Tuple[str, ...] = ()
    display_unit: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (NUMERICAL, CATEGORICAL):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ValueError(f"categorical feature {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate category names in {self.name!r}")
        elif self.categories:
            raise ValueError(f"numerical feature {self.name!r} cannot have categories")

    @property
    def n_categories(self):
        return len(self.categories)

    def code_of(self, name):
        try:
            return self.categories.index(name)
        except ValueError:
            raise UnknownCategory(self.name, name) from None


@dataclass(frozen=True)
class LabelSchema:
    name: str
    positive_meaning: str
    negative_meaning: str


@dataclass(frozen=True)
class DatasetSchema:
    dataset_id: str
    features: Tuple[FeatureSchema, ...]
    label: LabelSchema

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        if self.label.name in names:
            raise ValueError("label column cannot also be a feature")

    @property
    def n_features(self):
        return len(self.features)

    @property
    def feature_names(self):
        return tuple(f.name for f in self.features)

    def feature_index(self, name):
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise MissingColumn(f"no feature named {name!r}")

    def feature(self, name):
        return self.features[self.feature_index(name)]

    def to_json(self):
        return {
            "dataset_id": self.dataset_id,
            "features": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    **({"categories": list(f.categories)} if f.kind == CATEGORICAL else {}),
                    **({"display_unit": f.display_unit} if f.display_unit else {}),
                }
                for f in self.features
            ],
            "label": {
                "name": self.label.name,
                "positive_meaning": self.label.positive_meaning,
                "negative_meaning": self.label.negative_meaning,
            },
        }

    @classmethod
    def from_json(cls, obj):
        features = tuple(
            FeatureSchema(
                name=f["name"],
                kind=f["kind"],
                categories=tuple(f.get("categories", ())),
                display_unit=f.get("display_unit"),
            )
            for f in obj["features"]
        )
        lab = obj["label"]
        return cls(
            dataset_id=obj["dataset_id"],
            features=features,
            label=LabelSchema(lab["name"], lab["positive_meaning"], lab["negative_meaning"]),
        )


@dataclass(frozen=True)
class Dataset:
    schema: DatasetSchema
    matrix: np.ndarray  # (n_rows, n_features) float64
    labels: np.ndarray  # (n_rows,) int64 in {0, 1}

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_rows(self):
        return self.matrix.shape[0]

    @property
    def dataset_id(self):
        return self.schema.dataset_id

    def column(self, name):
        return self.matrix[:, self.schema.feature_index(name)]


# ---------------------------------------------------------------------------
# sensitive groups and masks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupRule:
    """Membership rule: a set of category codes, or a half-open [lo, hi)."""

    categories: Optional[Tuple[int, ...]] = None
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if (self.categories is None) == (self.lo is None and self.hi is None):
            raise ValueError("rule must be either category codes or a numeric range")
        if self.categories is not None and len(self.categories) == 0:
            raise ValueError("category rule must list at least one code")

    @property
    def is_categorical(self):
        return self.categories is not None

    def matches(self, values):
        if self.is_categorical:
            return np.isin(values, np.asarray(self.categories))
        lo = -math.inf if self.lo is None else self.lo
        hi = math.inf if self.hi is None else self.hi
        return (values >= lo) & (values < hi)

    def canonical_value(self, observed_lo=None, observed_hi=None):
        """Representative value for forcing/flipping the sensitive cell.

        Categorical rules use their first declared code. Numeric rules
        use the midpoint of the range, clamped to the observed column
        range when an endpoint is unbounded.
        """
        if self.is_categorical:
            return float(self.categories[0])
        lo = self.lo
        hi = self.hi
        if lo is None:
            lo = observed_lo if observed_lo is not None else hi
        if hi is None or not math.isfinite(hi):
            hi = observed_hi if observed_hi is not None else lo
        lo, hi = float(lo), float(hi)
        if hi < lo:
            hi = lo
        return (lo + hi) / 2.0


@dataclass(frozen=True)
class SensitiveSpec:
    feature_name: str
    group0_rule: GroupRule
    group1_rule: GroupRule
    group_labels: Tuple[str, str] = ("group 0", "group 1")

    def __post_init__(self):
        g0, g1 = self.group0_rule, self.group1_rule
        if g0.is_categorical != g1.is_categorical:
            raise ValueError("both group rules must have the same kind")
        if g0.is_categorical:
            if set(g0.categories) & set(g1.categories):
                raise ValueError("group rules overlap")
        else:
            lo0 = -math.inf if g0.lo is None else g0.lo
            hi0 = math.inf if g0.hi is None else g0.hi
            lo1 = -math.inf if g1.lo is None else g1.lo
            hi1 = math.inf if g1.hi is None else g1.hi
            if max(lo0, lo1) < min(hi0, hi1):
                raise ValueError("group ranges overlap")

    def to_json(self, schema=None):
        def rule_json(rule):
            if rule.is_categorical:
                if schema is not None:
                    cats = schema.feature(self.feature_name).categories
                    return {"categories": [cats[c] for c in rule.categories]}
                return {"categories": list(rule.categories)}
            return {"range": [rule.lo, rule.hi]}

        return {
            "feature": self.feature_name,
            "group0": rule_json(self.group0_rule),
            "group1": rule_json(self.group1_rule),
            "labels": list(self.group_labels),
        }

    @classmethod
    def from_json(cls, obj, schema):
        feature = schema.feature(obj["feature"])

        def parse_rule(spec):
            if "categories" in spec:
                if feature.kind != CATEGORICAL:
                    raise ValueError(f"category rule on numerical feature {feature.name!r}")
                codes = []
                for c in spec["categories"]:
                    codes.append(feature.code_of(c) if isinstance(c, str) else int(c))
                for code in codes:
                    if not 0 <= code < feature.n_categories:
                        raise UnknownCategory(feature.name, code)
                return GroupRule(categories=tuple(codes))
            if "range" in spec:
                if feature.kind != NUMERICAL:
                    raise ValueError(f"range rule on categorical feature {feature.name!r}")
                lo, hi = spec["range"]
                return GroupRule(lo=None if lo is None else float(lo), hi=None if hi is None else float(hi))
            raise ValueError("rule needs 'categories' or 'range'")

        labels = obj.get("labels", ["group 0", "group 1"])
        return cls(
            feature_name=obj["feature"],
            group0_rule=parse_rule(obj["group0"]),
            group1_rule=parse_rule(obj["group1"]),
            group_labels=(labels[0], labels[1]),
        )


MASK_ALL = "all"
MASK_CATEGORIES = "categories"
MASK_RANGE = "range"


@dataclass(frozen=True)
class MaskRule:
    kind: str
    categories: Tuple[int, ...] = ()
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (MASK_ALL, MASK_CATEGORIES, MASK_RANGE):
            raise ValueError(f"unknown mask rule kind {self.kind!r}")


@dataclass(frozen=True)
class MaskSpec:
    entries: Dict[str, MaskRule] = field(default_factory=dict)

    @property
    def is_empty(self):
        return not self.entries

    def to_json(self, schema=None):
        out = {}
        for name, rule in self.entries.items():
            if rule.kind == MASK_ALL:
                out[name] = "all"
            elif rule.kind == MASK_CATEGORIES:
                if schema is not None:
                    cats = schema.feature(name).categories
                    out[name] = {"categories": [cats[c] for c in rule.categories]}
                else:
                    out[name] = {"categories": list(rule.categories)}
            else:
                out[name] = {"range": [rule.lo, rule.hi]}
        return out

    @classmethod
    def from_json(cls, obj, schema):
        entries = {}
        for name, spec in obj.items():
            feature = schema.feature(name)
            if spec == "all" or spec == {"all": True}:
                entries[name] = MaskRule(MASK_ALL)
            elif isinstance(spec, dict) and "categories" in spec:
                if feature.kind != CATEGORICAL:
                    raise InvalidMask(f"category mask on numerical feature {name!r}")
                codes = tuple(
                    feature.code_of(c) if isinstance(c, str) else int(c) for c in spec["categories"]
                )
                entries[name] = MaskRule(MASK_CATEGORIES, categories=codes)
            elif isinstance(spec, dict) and "range" in spec:
                if feature.kind != NUMERICAL:
                    raise InvalidMask(f"range mask on categorical feature {name!r}")
                lo, hi = spec["range"]
                entries[name] = MaskRule(
                    MASK_RANGE,
                    lo=None if lo is None else float(lo),
                    hi=None if hi is None else float(hi),
                )
            else:
                raise InvalidMask(f"unintelligible mask rule for {name!r}: {spec!r}")
        return cls(entries=entries)


# ---------------------------------------------------------------------------
# bias summary types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CategoryStat:
    label: str
    count_group0: int
    count_group1: int

    @property
    def share_group1(self):
        total = self.count_group0 + self.count_group1
        if total == 0:
            return None
        return self.count_group1 / total


@dataclass(frozen=True)
class FeatureBias:
    feature: str
    correlation: float
    degenerate: bool
    is_sensitive: bool
    categories: Tuple[CategoryStat, ...]


@dataclass(frozen=True)
class FeatureBiasSummary:
    dataset_id: str
    sensitive_feature: str
    group_labels: Tuple[str, str]
    n_group0: int
    n_group1: int
    n_excluded: int
    features: Tuple[FeatureBias, ...]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def load_dataset(csv_text, schema):
    """Parse CSV text against a schema into an encoded Dataset.

    The header must name every schema feature plus the label column.
    Categorical cells may be category names or literal integer codes;
    label cells may be the declared meanings or literal 0/1.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset("no header row") from None

    expected = list(schema.feature_names) + [schema.label.name]
    missing = [name for name in expected if name not in header]
    if missing:
        raise MissingColumn(f"missing columns: {missing}")
    extra = [name for name in header if name not in expected]
    if extra:
        raise MissingColumn(f"unexpected columns: {extra}")
    col_of = {name: header.index(name) for name in expected}

    rows = []
    labels = []
    lab = schema.label
    label_map = {lab.positive_meaning: 1, lab.negative_meaning: 0, "1": 1, "0": 0}
    for line_no, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != len(header):
            raise MissingColumn(f"row {line_no} has {len(cells)} cells, expected {len(header)}")
        encoded = np.empty(schema.n_features, dtype=np.float64)
        for j, feat in enumerate(schema.features):
            raw = cells[col_of[feat.name]]
            if feat.kind == CATEGORICAL:
                if raw in feat.categories:
                    encoded[j] = feat.categories.index(raw)
                else:
                    try:
                        code = int(raw)
                    except ValueError:
                        raise UnknownCategory(feat.name, raw) from None
                    if not 0 <= code < feat.n_categories:
                        raise UnknownCategory(feat.name, raw)
                    encoded[j] = code
            else:
                try:
                    encoded[j] = float(raw)
                except ValueError:
                    raise NonNumericCell(
                        f"row {line_no}, feature {feat.name!r}: {raw!r}"
                    ) from None
                if not math.isfinite(encoded[j]):
                    raise NonNumericCell(f"row {line_no}, feature {feat.name!r}: {raw!r}")
        raw_label = cells[col_of[lab.name]]
        if raw_label not in label_map:
            raise UnknownCategory(lab.name, raw_label)
        rows.append(encoded)
        labels.append(label_map[raw_label])

    if not rows:
        raise EmptyDataset("no data rows")
    return Dataset(schema=schema, matrix=np.array(rows), labels=np.array(labels, dtype=np.int64))


def decode_row(ds, index):
    """Map one encoded row back to display values (category names, floats)."""
    out = {}
    for j, feat in enumerate(ds.schema.features):
        value = ds.matrix[index, j]
        if feat.kind == CATEGORICAL:
            out[feat.name] = feat.categories[int(value)]
        else:
            out[feat.name] = float(value)
    return out


def assign_groups(ds, spec):
    """Per-row group vector: 0, 1, or EXCLUDED.

    Raises NoMembers if either group matches no rows.
    """
    values = ds.column(spec.feature_name)
    groups = np.full(ds.n_rows, EXCLUDED, dtype=np.int64)
    in0 = spec.group0_rule.matches(values)
    in1 = spec.group1_rule.matches(values)
    groups[in0] = 0
    groups[in1] = 1
    if not in0.any():
        raise NoMembers(0)
    if not in1.any():
        raise NoMembers(1)
    return groups


def _pearson(x, indicator):
    """Product-moment correlation, or (0.0, degenerate=True) on zero variance."""
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(indicator, dtype=np.float64)
    if len(x) == 0 or np.all(x == x[0]) or np.all(g == g[0]):
        return 0.0, True
    sx = x.std()
    sg = g.std()
    r = float(np.mean((x - x.mean()) * (g - g.mean())) / (sx * sg))
    return max(-1.0, min(1.0, r)), False


def _bin_label(lo, hi, last):
    if last:
        return f"[{lo:g}, {hi:g}]"
    return f"[{lo:g}, {hi:g})"


def numeric_bins(values, n_bins=N_BINS):
    """Equal-width bin edges over the observed [min, max].

    Returns (edges, labels); a constant column collapses to one bin.
    """
    lo = float(np.min(values))
    hi = float(np.max(values))
    if lo == hi:
        return np.array([lo, hi]), [_bin_label(lo, hi, True)]
    edges = np.linspace(lo, hi, n_bins + 1)
    labels = [_bin_label(edges[i], edges[i + 1], i == n_bins - 1) for i in range(n_bins)]
    return edges, labels


def bin_index(values, edges):
    """Bin membership for values known to lie within [edges[0], edges[-1]]."""
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def bias_summary(ds, spec):
    """Correlations and per-category group counts against the sensitive groups.

    Statistics cover only rows assigned to group 0 or 1; numerical
    features are summarized over equal-width bins.
    """
    groups = assign_groups(ds, spec)
    kept = groups != EXCLUDED
    indicator = groups[kept]
    n0 = int((indicator == 0).sum())
    n1 = int((indicator == 1).sum())

    features = []
    for j, feat in enumerate(ds.schema.features):
        col = ds.matrix[kept, j]
        corr, degenerate = _pearson(col, indicator)
        stats = []
        if feat.kind == CATEGORICAL:
            codes = col.astype(np.int64)
            for code, name in enumerate(feat.categories):
                sel = codes == code
                stats.append(
                    CategoryStat(
                        label=name,
                        count_group0=int((sel & (indicator == 0)).sum()),
                        count_group1=int((sel & (indicator == 1)).sum()),
                    )
                )
        else:
            edges, labels = numeric_bins(col)
            idx = bin_index(col, edges)
            for b, label in enumerate(labels):
                sel = idx == b
                stats.append(
                    CategoryStat(
                        label=label,
                        count_group0=int((sel & (indicator == 0)).sum()),
                        count_group1=int((sel & (indicator == 1)).sum()),
                    )
                )
        features.append(
            FeatureBias(
                feature=feat.name,
                correlation=corr,
                degenerate=degenerate,
                is_sensitive=feat.name == spec.feature_name,
                categories=tuple(stats),
            )
        )

    return FeatureBiasSummary(
        dataset_id=ds.dataset_id,
        sensitive_feature=spec.feature_name,
        group_labels=spec.group_labels,
        n_group0=n0,
        n_group1=n1,
        n_excluded=int((~kept).sum()),
        features=tuple(features),
    )


def _validate_mask(ds, mask):
    for name, rule in mask.entries.items():
        feat = ds.schema.feature(name)  # raises MissingColumn
        if rule.kind == MASK_CATEGORIES:
            if feat.kind != CATEGORICAL:
                raise InvalidMask(f"category mask on numerical feature {name!r}")
            for code in rule.categories:
                if not 0 <= code < feat.n_categories:
                    raise InvalidMask(f"mask code {code} out of range for {name!r}")
        elif rule.kind == MASK_RANGE:
            if feat.kind != NUMERICAL:
                raise InvalidMask(f"range mask on categorical feature {name!r}")
            lo = -math.inf if rule.lo is None else rule.lo
            hi = math.inf if rule.hi is None else rule.hi
            if hi < lo:
                raise InvalidMask(f"empty mask range for {name!r}")


@dataclass(frozen=True)
class MaskTransform:
    """Row transform fixed at mask time: maps raw rows to masked rows.

    Numeric sentinel values are computed once from the dataset the mask
    was bound to, so later rows (API inputs, sampled points) are masked
    exactly the way the training data was.
    """

    schema: DatasetSchema  # the post-mask schema
    ops: Tuple[tuple, ...]  # (col, kind, rule, sentinel_value)

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = X.copy()
        for j, kind, rule, sentinel in self.ops:
            col = out[:, j]
            if rule.kind == MASK_ALL:
                target = np.ones(len(col), dtype=bool)
            elif rule.kind == MASK_CATEGORIES:
                target = np.isin(col, np.asarray(rule.categories, dtype=np.float64))
            else:
                lo = -math.inf if rule.lo is None else rule.lo
                hi = math.inf if rule.hi is None else rule.hi
                target = (col >= lo) & (col < hi)
            col[target] = sentinel
        return out

    @property
    def is_identity(self):
        return not self.ops


def mask_transform(ds, mask):
    """Validate a mask against the dataset and build its row transform."""
    bad = [n for n in mask.entries if n not in ds.schema.feature_names]
    if bad:
        raise InvalidMask(f"mask names unknown features: {bad}")
    _validate_mask(ds, mask)

    ops = []
    new_features = list(ds.schema.features)
    for name, rule in mask.entries.items():
        j = ds.schema.feature_index(name)
        feat = ds.schema.features[j]
        col = ds.matrix[:, j]
        if feat.kind == CATEGORICAL:
            if MASKED_CATEGORY in feat.categories:
                sentinel = float(feat.categories.index(MASKED_CATEGORY))
            else:
                sentinel = float(feat.n_categories)
                new_features[j] = FeatureSchema(
                    name=feat.name,
                    kind=CATEGORICAL,
                    categories=feat.categories + (MASKED_CATEGORY,),
                    display_unit=feat.display_unit,
                )
        else:
            if rule.kind == MASK_ALL:
                target = np.ones(len(col), dtype=bool)
            else:
                lo = -math.inf if rule.lo is None else rule.lo
                hi = math.inf if rule.hi is None else rule.hi
                target = (col >= lo) & (col < hi)
            keep = ~target
            if keep.any():
                sentinel = float(col[keep].mean())
            elif np.all(col == col[0]):
                sentinel = float(col[0])  # keeps re-masking bit-exact
            else:
                sentinel = float(col.mean())
        ops.append((j, feat.kind, rule, sentinel))
    schema = DatasetSchema(
        dataset_id=ds.schema.dataset_id, features=tuple(new_features), label=ds.schema.label
    )
    return MaskTransform(schema=schema, ops=tuple(ops))


def apply_mask(ds, mask):
    """Collapse the targeted cells of each masked feature to one sentinel.

    Categorical targets map to a reserved ``__masked__`` category
    appended to the feature's schema; numerical targets map to the mean
    of the unmasked rows (global column mean when everything is
    masked). Column count, row order, and labels are unchanged, and the
    operation is idempotent.
    """
    transform = mask_transform(ds, mask)
    return Dataset(
        schema=transform.schema, matrix=transform.apply(ds.matrix), labels=ds.labels.copy()
    )
