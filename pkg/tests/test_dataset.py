import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_dataset, categorical_spec
from fairlens.dataset import (
    EXCLUDED,
    MASKED_CATEGORY,
    Dataset,
    DatasetSchema,
    FeatureSchema,
    GroupRule,
    LabelSchema,
    MaskRule,
    MaskSpec,
    SensitiveSpec,
    apply_mask,
    assign_groups,
    bias_summary,
    decode_row,
    load_dataset,
)
from fairlens.errors import (
    EmptyDataset,
    InvalidMask,
    MissingColumn,
    NoMembers,
    NonNumericCell,
    UnknownCategory,
)


def color_schema():
    return DatasetSchema(
        dataset_id="colors",
        features=(FeatureSchema(name="color", kind="categorical", categories=("red", "blue")),),
        label=LabelSchema("label", "pos", "neg"),
    )


def mixed_schema():
    return DatasetSchema(
        dataset_id="mixed",
        features=(
            FeatureSchema(name="age", kind="numerical"),
            FeatureSchema(name="color", kind="categorical", categories=("red", "blue", "green")),
        ),
        label=LabelSchema("label", "pos", "neg"),
    )


# -- load_dataset -----------------------------------------------------------


def test_load_encodes_by_declaration_order():
    ds = load_dataset("color,label\nred,pos\nblue,neg\n", color_schema())
    assert ds.matrix.tolist() == [[0.0], [1.0]]
    assert ds.labels.tolist() == [1, 0]


def test_load_rejects_unknown_category():
    with pytest.raises(UnknownCategory):
        load_dataset("color,label\ngreen,pos\n", color_schema())


def test_load_accepts_numeric_codes_for_categories():
    ds = load_dataset("color,label\n1,pos\n", color_schema())
    assert ds.matrix.tolist() == [[1.0]]


def test_load_errors():
    with pytest.raises(MissingColumn):
        load_dataset("color\nred\n", color_schema())
    with pytest.raises(MissingColumn):
        load_dataset("color,label,extra\nred,pos,1\n", color_schema())
    with pytest.raises(EmptyDataset):
        load_dataset("color,label\n", color_schema())
    with pytest.raises(EmptyDataset):
        load_dataset("", color_schema())
    with pytest.raises(NonNumericCell):
        load_dataset("age,color,label\nabc,red,pos\n", mixed_schema())
    with pytest.raises(UnknownCategory):
        load_dataset("age,color,label\n5,red,maybe\n", mixed_schema())


def test_load_header_order_free():
    ds = load_dataset("label,color\npos,blue\n", color_schema())
    assert ds.matrix.tolist() == [[1.0]]
    assert ds.labels.tolist() == [1]


def test_label_counts_match_raw_file_oracle():
    rng = np.random.default_rng(3)
    lines = ["age,color,label"]
    for _ in range(137):
        age = rng.integers(18, 90)
        color = rng.choice(["red", "blue", "green"])
        label = rng.choice(["pos", "neg"])
        lines.append(f"{age},{color},{label}")
    text = "\n".join(lines) + "\n"
    # independent line-count/grep-style oracle on the raw text
    raw_rows = len(text.strip().splitlines()) - 1
    raw_pos = sum(1 for line in text.splitlines()[1:] if line.endswith(",pos"))
    ds = load_dataset(text, mixed_schema())
    assert ds.n_rows == raw_rows
    assert int(ds.labels.sum()) == raw_pos


def test_encode_decode_round_trip():
    text = "age,color,label\n25,red,pos\n61,green,neg\n40.5,blue,pos\n"
    ds = load_dataset(text, mixed_schema())
    raw_rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    for i, raw in enumerate(raw_rows):
        decoded = decode_row(ds, i)
        assert decoded["age"] == float(raw[0])
        assert decoded["color"] == raw[1]


# -- assign_groups ----------------------------------------------------------


def test_assign_groups_categorical():
    ds = build_dataset([[1], [0], [1]], [0, 0, 1], kinds=["cat"], names=["gender"])
    spec = SensitiveSpec(
        feature_name="gender",
        group0_rule=GroupRule(categories=(0,)),
        group1_rule=GroupRule(categories=(1,)),
        group_labels=("female", "male"),
    )
    assert assign_groups(ds, spec).tolist() == [1, 0, 1]


def test_assign_groups_age_ranges_exclude_midrange():
    ds = build_dataset([[20.0], [30.0], [50.0]], [0, 1, 0], names=["age"])
    spec = SensitiveSpec(
        feature_name="age",
        group0_rule=GroupRule(lo=0.0, hi=25.0),
        group1_rule=GroupRule(lo=45.0, hi=None),
        group_labels=("under 25", "over 45"),
    )
    assert assign_groups(ds, spec).tolist() == [0, EXCLUDED, 1]


def test_assign_groups_no_members():
    ds = build_dataset([[30.0], [30.0]], [0, 1], names=["age"])
    spec = SensitiveSpec(
        feature_name="age",
        group0_rule=GroupRule(lo=0.0, hi=25.0),
        group1_rule=GroupRule(lo=45.0, hi=None),
    )
    with pytest.raises(NoMembers):
        assign_groups(ds, spec)


def test_overlapping_rules_rejected():
    with pytest.raises(ValueError):
        SensitiveSpec(
            feature_name="age",
            group0_rule=GroupRule(lo=0.0, hi=30.0),
            group1_rule=GroupRule(lo=25.0, hi=None),
        )
    with pytest.raises(ValueError):
        SensitiveSpec(
            feature_name="c",
            group0_rule=GroupRule(categories=(0, 1)),
            group1_rule=GroupRule(categories=(1, 2)),
        )


# -- bias_summary -----------------------------------------------------------


def test_sensitive_feature_self_correlation_is_one():
    rng = np.random.default_rng(1)
    s = rng.integers(0, 2, 400)
    ds = build_dataset(s[:, None], rng.integers(0, 2, 400), kinds=["cat"], names=["s"])
    summary = bias_summary(ds, categorical_spec())
    assert summary.features[0].correlation == pytest.approx(1.0)
    assert summary.features[0].is_sensitive


def test_constant_feature_flagged_degenerate():
    rng = np.random.default_rng(2)
    s = rng.integers(0, 2, 50)
    X = np.column_stack([s, np.full(50, 7.0)])
    ds = build_dataset(X, rng.integers(0, 2, 50), kinds=["cat", "num"], names=["s", "const"])
    summary = bias_summary(ds, categorical_spec())
    const = summary.features[1]
    assert const.degenerate
    assert const.correlation == 0.0


def test_independent_feature_has_small_correlation():
    n = 10_000
    rng = np.random.default_rng(42)
    s = rng.integers(0, 2, n)
    x = rng.normal(size=n)
    ds = build_dataset(np.column_stack([s, x]), rng.integers(0, 2, n), kinds=["cat", "num"], names=["s", "x"])
    summary = bias_summary(ds, categorical_spec())
    assert abs(summary.features[1].correlation) < 3.0 / np.sqrt(n)


def test_bias_counts_cover_all_non_excluded_rows():
    rng = np.random.default_rng(5)
    n = 300
    s = rng.integers(0, 3, n)  # code 2 in neither group
    x = rng.normal(size=n)
    c = rng.integers(0, 4, n)
    ds = build_dataset(
        np.column_stack([s, x, c]), rng.integers(0, 2, n), kinds=["cat", "num", "cat"], names=["s", "x", "c"]
    )
    summary = bias_summary(ds, categorical_spec())
    n_kept = summary.n_group0 + summary.n_group1
    assert n_kept + summary.n_excluded == n
    for fb in summary.features:
        total = sum(cs.count_group0 + cs.count_group1 for cs in fb.categories)
        assert total == n_kept
        for cs in fb.categories:
            if cs.share_group1 is not None:
                assert cs.share_group1 == cs.count_group1 / (cs.count_group0 + cs.count_group1)


# -- apply_mask -------------------------------------------------------------


def test_mask_all_numeric_column_goes_constant():
    rng = np.random.default_rng(8)
    s = rng.integers(0, 2, 100)
    age = rng.uniform(18, 90, 100)
    ds = build_dataset(np.column_stack([s, age]), rng.integers(0, 2, 100), kinds=["cat", "num"], names=["s", "age"])
    masked = apply_mask(ds, MaskSpec(entries={"age": MaskRule("all")}))
    col = masked.column("age")
    assert np.all(col == col[0])
    assert col[0] == pytest.approx(age.mean())
    summary = bias_summary(masked, categorical_spec())
    assert summary.features[1].degenerate  # correlation now undefined


def test_mask_category_subset_collapses_to_sentinel():
    cats = ["husband", "own children", "unmarried", "wife"]
    codes = np.array([0, 1, 2, 3, 0, 3])
    ds = build_dataset(
        codes[:, None], [0, 1, 0, 1, 1, 0], kinds=["cat"], names=["relationship"],
        categories={"relationship": cats},
    )
    mask = MaskSpec(entries={"relationship": MaskRule("categories", categories=(0, 3))})
    masked = apply_mask(ds, mask)
    feat = masked.schema.feature("relationship")
    assert feat.categories == (*cats, MASKED_CATEGORY)
    sentinel = feat.categories.index(MASKED_CATEGORY)
    assert masked.column("relationship").tolist() == [sentinel, 1, 2, sentinel, sentinel, sentinel]


def test_empty_mask_is_identity():
    rng = np.random.default_rng(9)
    ds = build_dataset(rng.normal(size=(20, 2)), rng.integers(0, 2, 20))
    masked = apply_mask(ds, MaskSpec())
    assert np.array_equal(masked.matrix, ds.matrix)
    assert masked.schema == ds.schema


def test_invalid_masks_rejected():
    ds = build_dataset([[0.0, 1.0]], [0], kinds=["num", "cat"], names=["x", "c"])
    with pytest.raises(InvalidMask):
        apply_mask(ds, MaskSpec(entries={"nope": MaskRule("all")}))
    with pytest.raises(InvalidMask):
        apply_mask(ds, MaskSpec(entries={"x": MaskRule("categories", categories=(0,))}))
    with pytest.raises(InvalidMask):
        apply_mask(ds, MaskSpec(entries={"c": MaskRule("range", lo=0.0, hi=1.0)}))
    with pytest.raises(InvalidMask):
        apply_mask(ds, MaskSpec(entries={"c": MaskRule("categories", categories=(9,))}))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    rule_kind=st.sampled_from(["all-cat", "subset", "all-num", "range"]),
)
def test_mask_idempotent_and_label_preserving(seed, rule_kind):
    rng = np.random.default_rng(seed)
    n = 40
    X = np.column_stack([rng.integers(0, 4, n), rng.uniform(-5, 5, n)])
    ds = build_dataset(X, rng.integers(0, 2, n), kinds=["cat", "num"], names=["c", "x"])
    if rule_kind == "all-cat":
        mask = MaskSpec(entries={"c": MaskRule("all")})
    elif rule_kind == "subset":
        mask = MaskSpec(entries={"c": MaskRule("categories", categories=(0, 2))})
    elif rule_kind == "all-num":
        mask = MaskSpec(entries={"x": MaskRule("all")})
    else:
        mask = MaskSpec(entries={"x": MaskRule("range", lo=-1.0, hi=2.0)})
    once = apply_mask(ds, mask)
    twice = apply_mask(once, mask)
    assert np.array_equal(once.matrix, twice.matrix)
    assert once.schema == twice.schema
    assert np.array_equal(once.labels, ds.labels)
    assert once.matrix.shape == ds.matrix.shape


def test_mask_spec_json_round_trip():
    schema = mixed_schema()
    obj = {"color": {"categories": ["red", "green"]}, "age": {"range": [18, 30]}}
    mask = MaskSpec.from_json(obj, schema)
    assert mask.entries["color"].categories == (0, 2)
    assert mask.entries["age"].lo == 18.0
    back = mask.to_json(schema)
    assert back["color"] == {"categories": ["red", "green"]}
    assert back["age"] == {"range": [18.0, 30.0]}


def test_sensitive_spec_json_round_trip():
    schema = mixed_schema()
    obj = {
        "feature": "age",
        "group0": {"range": [0, 25]},
        "group1": {"range": [45, None]},
        "labels": ["young", "old"],
    }
    spec = SensitiveSpec.from_json(obj, schema)
    assert spec.group1_rule.hi is None
    assert spec.to_json()["group1"] == {"range": [45.0, None]}
