"""Masking remedies: retrain the same architecture on masked data and
compare fairness before and after.

The remedied model only ever sees masked inputs: evaluation wraps it in
the mask's row transform, so counterfactual flips and sampled points
pass through the same masking the training data did. Group membership
always comes from the original (unmasked) rows; masking a sensitive
column hides it from the model, not from the audit. Sampler scores
share one seed and one set of sampled points across the before/after
sides, so the comparison isolates the model change.
"""

from dataclasses import dataclass

from . import metrics, models, sampler
from .dataset import CATEGORICAL, apply_mask, bias_summary, mask_transform
from .explain import PerturbationConfig, aggregate_importance, sample_counterfactual_points
from .sweep import ModelRecord, record_id_for


class MaskedModel:
    """Model wrapped in a mask transform; inputs are masked, then scored."""

    def __init__(self, model, transform):
        self.model = model
        self.transform = transform
        self.kind = model.kind
        self.n_features = model.n_features

    def predict_proba_batch(self, X):
        return self.model.predict_proba_batch(self.transform.apply(X))


@dataclass(frozen=True)
class ComparisonSide:
    accuracy: float
    aod: float
    group_score: float
    causal_score: float


@dataclass(frozen=True)
class RemedyResult:
    base_record_id: str
    remedied_record_id: str
    mask: dict  # MaskSpec JSON (category names resolved)
    before: ComparisonSide
    after: ComparisonSide
    sampler_seed: int
    themis_n: int

    def to_json(self):
        """Unmasked/masked column semantics of the comparison tables."""
        return {
            "base_record_id": self.base_record_id,
            "remedied_record_id": self.remedied_record_id,
            "mask": self.mask,
            "unmasked_score": self.before.accuracy,
            "masked_score": self.after.accuracy,
            "unmasked_aod": self.before.aod,
            "masked_aod": self.after.aod,
            "unmasked_group": self.before.group_score,
            "masked_group": self.after.group_score,
            "unmasked_causal": self.before.causal_score,
            "masked_causal": self.after.causal_score,
            "sampler_seed": self.sampler_seed,
            "themis_n": self.themis_n,
        }


def _side(model, ds, spec, seed, themis_n):
    """One comparison side, evaluated on the original dataset/schema."""
    report = metrics.fairness_report(model, ds, spec)
    bounds = sampler.bounds_from_dataset(ds)
    group = sampler.themis_group_score(model, ds.schema, spec, themis_n, seed, bounds)
    causal = sampler.themis_causal_score(model, ds.schema, bounds, spec, themis_n, seed)
    return report, ComparisonSide(
        accuracy=report.accuracy, aod=report.aod, group_score=group, causal_score=causal
    )


def apply_remedy(record, mask, ds, spec, seed, model=None, store=None, themis_n=sampler.DEFAULT_N):
    """Retrain the record's (kind, hyperparams, train seed) on masked data.

    ``seed`` drives only the sampler scores, shared across both sides.
    Returns (RemedyResult, remedied_model); persists the remedied model
    as a new record linked to the base when a store is given.
    """
    if model is None:
        if store is None:
            raise ValueError("need either the trained model or a store to load it from")
        record, model = store.load_record(record.record_id)

    _, before = _side(model, ds, spec, seed, themis_n)

    transform = mask_transform(ds, mask)
    masked_ds = apply_mask(ds, mask)
    hp = models.params_from_json(record.kind, record.hyperparams)
    remedied = models.train(record.kind, hp, masked_ds, record.train_seed)
    after_report, after = _side(MaskedModel(remedied, transform), ds, spec, seed, themis_n)

    remedied_record = ModelRecord(
        record_id=record_id_for(remedied, masked_ds.dataset_id),
        kind=record.kind,
        hyperparams=record.hyperparams,
        dataset_id=record.dataset_id,
        sensitive_tag=record.sensitive_tag,
        accuracy=after_report.accuracy,
        aod_signed=after_report.aod_signed,
        aod=after_report.aod,
        train_seed=record.train_seed,
        converged=getattr(remedied, "converged", True),
        base_record_id=record.record_id,
        mask=mask.to_json(ds.schema),
    )
    if store is not None:
        store.save_record(remedied_record, remedied)

    result = RemedyResult(
        base_record_id=record.record_id,
        remedied_record_id=remedied_record.record_id,
        mask=mask.to_json(ds.schema),
        before=before,
        after=after,
        sampler_seed=int(seed),
        themis_n=int(themis_n),
    )
    return result, remedied


@dataclass(frozen=True)
class MaskSuggestion:
    feature: str
    category_label: str
    mask: dict  # MaskSpec JSON for this single candidate
    importance: float
    share_deviation: float

    @property
    def score(self):
        return self.importance * self.share_deviation

    def to_json(self):
        return {
            "feature": self.feature,
            "category": self.category_label,
            "mask": self.mask,
            "importance": self.importance,
            "share_deviation": self.share_deviation,
            "score": self.score,
        }


def suggest_masks(model, ds, spec, cfg=None, top_n=10, importance_eps=1e-9):
    """Ranked mask candidates: (feature, category) pairs scored by
    aggregate surrogate importance times the category's group-share
    deviation from the overall group-1 share.

    Advisory only; nothing is applied. Features the model never uses
    produce no suggestions.
    """
    if cfg is None:
        cfg = PerturbationConfig(n_samples=1000)
    sample = sample_counterfactual_points(model, ds, spec, k=15, seed=cfg.seed)
    rows = sample.rows
    if len(rows) == 0:
        # no counterfactuals; fall back to the first rows for importance
        rows = ds.matrix[: min(15, ds.n_rows)]
    importance = dict(aggregate_importance(model, rows, ds, cfg))

    summary = bias_summary(ds, spec)
    n0 = summary.n_group0
    n1 = summary.n_group1
    overall_share = n1 / (n0 + n1)

    suggestions = []
    for fb in summary.features:
        imp = importance.get(fb.feature, 0.0)
        if imp <= importance_eps:
            continue
        feat = ds.schema.feature(fb.feature)
        for code, stat in enumerate(fb.categories):
            share = stat.share_group1
            if share is None:
                continue
            deviation = abs(share - overall_share)
            if feat.kind == CATEGORICAL:
                mask_json = {fb.feature: {"categories": [feat.categories[code]]}}
            else:
                # numeric bins carry their range in the label: "[lo, hi)"
                lo, hi = _parse_bin(stat.label)
                mask_json = {fb.feature: {"range": [lo, hi]}}
            suggestions.append(
                MaskSuggestion(
                    feature=fb.feature,
                    category_label=stat.label,
                    mask=mask_json,
                    importance=imp,
                    share_deviation=deviation,
                )
            )
    suggestions.sort(key=lambda s: (-s.score, s.feature, s.category_label))
    return suggestions[:top_n]


def _parse_bin(label):
    closed_upper = label.endswith("]")
    inner = label.strip("[]()")
    lo, hi = inner.split(",")
    # a closed top bin masks everything from lo upward
    return float(lo), None if closed_upper else float(hi)
