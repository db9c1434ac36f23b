"""Label-free fairness estimation on uniform samples of the feature space.

Sampling is organized in fixed-size blocks, each drawn from its own
counter-derived substream, so results are bit-identical no matter how
the blocks are distributed over workers. Scores reduce to integer
counts before any division.
"""

import math

import numpy as np

from . import models
from .dataset import CATEGORICAL
from .errors import InvalidBounds, NoMembers
from .seeding import generator, split_seed

DEFAULT_N = 50_000
_BLOCK = 4096


def bounds_from_dataset(ds):
    """Observed [min, max] per numerical feature; the default Themis range."""
    out = {}
    for j, feat in enumerate(ds.schema.features):
        if feat.kind != CATEGORICAL:
            col = ds.matrix[:, j]
            out[feat.name] = (float(col.min()), float(col.max()))
    return out


def _check_bounds(schema, bounds):
    for feat in schema.features:
        if feat.kind == CATEGORICAL:
            continue
        if feat.name not in bounds:
            raise InvalidBounds(f"no bounds for numerical feature {feat.name!r}")
        lo, hi = bounds[feat.name]
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidBounds(f"non-finite bounds for {feat.name!r}")
        if hi < lo:
            raise InvalidBounds(f"empty bounds for {feat.name!r}")
    for name in bounds:
        feat = schema.feature(name)
        if feat.kind == CATEGORICAL:
            raise InvalidBounds(f"bounds given for categorical feature {name!r}")


def _sample_block(schema, bounds, m, rng):
    cols = []
    for feat in schema.features:
        if feat.kind == CATEGORICAL:
            cols.append(rng.integers(0, feat.n_categories, size=m).astype(np.float64))
        else:
            lo, hi = bounds[feat.name]
            cols.append(rng.uniform(lo, hi, size=m))
    return np.column_stack(cols)


def uniform_sample(schema, bounds, n, seed):
    """n rows: categorical cells uniform over codes, numerical uniform
    over [lo, hi]. Deterministic under seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    _check_bounds(schema, bounds)
    if n == 0:
        return np.empty((0, schema.n_features))
    blocks = []
    for b in range(0, n, _BLOCK):
        m = min(_BLOCK, n - b)
        rng = generator(split_seed(seed, "block", b // _BLOCK))
        blocks.append(_sample_block(schema, bounds, m, rng))
    return np.vstack(blocks)


def themis_group_score(model, schema, spec, n_per_group=DEFAULT_N, seed=0, bounds=None, ds=None):
    """|posfrac(group 0) - posfrac(group 1)| / 2 over forced samples.

    Each group's sample has the sensitive cell forced to that group's
    canonical value; everything else is sampled uniformly.
    """
    if bounds is None:
        if ds is None:
            raise InvalidBounds("either bounds or ds must be provided")
        bounds = bounds_from_dataset(ds)
    _check_bounds(schema, bounds)
    j = schema.feature_index(spec.feature_name)
    feat = schema.features[j]
    if feat.kind == CATEGORICAL:
        observed = (0.0, float(feat.n_categories - 1))
    else:
        observed = bounds[spec.feature_name]
    forced = [
        spec.group0_rule.canonical_value(*observed),
        spec.group1_rule.canonical_value(*observed),
    ]
    pos = [0, 0]
    for g in (0, 1):
        rows = uniform_sample(schema, bounds, n_per_group, split_seed(seed, "group", g))
        rows[:, j] = forced[g]
        pos[g] = int(models.predict_batch(model, rows).sum())
    f0 = pos[0] / n_per_group
    f1 = pos[1] / n_per_group
    return abs(f0 - f1) / 2.0


def themis_causal_score(model, schema, bounds, spec, n=DEFAULT_N, seed=0):
    """Fraction of evaluable sampled points whose prediction flips under
    the sensitive flip. Points falling in neither group are skipped."""
    _check_bounds(schema, bounds)
    j = schema.feature_index(spec.feature_name)
    feat = schema.features[j]
    if feat.kind == CATEGORICAL:
        observed = (0.0, float(feat.n_categories - 1))
    else:
        observed = bounds[spec.feature_name]
    to_group1 = spec.group1_rule.canonical_value(*observed)
    to_group0 = spec.group0_rule.canonical_value(*observed)

    flips = 0
    evaluated = 0
    for b in range(0, n, _BLOCK):
        m = min(_BLOCK, n - b)
        rng = generator(split_seed(seed, "block", b // _BLOCK))
        rows = _sample_block(schema, bounds, m, rng)
        col = rows[:, j]
        in0 = spec.group0_rule.matches(col)
        in1 = spec.group1_rule.matches(col)
        member = in0 | in1
        if not member.any():
            continue
        flipped = rows.copy()
        flipped[in0, j] = to_group1
        flipped[in1, j] = to_group0
        before = models.predict_batch(model, rows[member])
        after = models.predict_batch(model, flipped[member])
        flips += int((before != after).sum())
        evaluated += int(member.sum())
    if n > 0 and evaluated == 0:
        raise NoMembers("no sampled point fell in either sensitive group")
    return flips / evaluated if evaluated else 0.0
