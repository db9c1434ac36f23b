"""Model populations from random hyperparameter mutation.

Each population index derives its own seed from the master seed, so a
sweep is reproducible record-for-record no matter how many workers run
it. Records keep both the signed and absolute average odds difference;
selection and the Pareto order use the absolute value.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

from . import metrics, models, sampler
from .errors import FairlensError, UndefinedRate
from .jsonutil import content_hash
from .seeding import generator, split_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelRecord:
    record_id: str
    kind: str
    hyperparams: dict
    dataset_id: str
    sensitive_tag: str
    accuracy: float
    aod_signed: float
    aod: float
    train_seed: int
    group_score: Optional[float] = None
    causal_score: Optional[float] = None
    converged: bool = True
    base_record_id: Optional[str] = None
    mask: Optional[dict] = None

    def to_json(self):
        return {
            "record_id": self.record_id,
            "kind": self.kind,
            "hyperparams": self.hyperparams,
            "dataset_id": self.dataset_id,
            "sensitive_tag": self.sensitive_tag,
            "accuracy": self.accuracy,
            "aod_signed": self.aod_signed,
            "aod": self.aod,
            "train_seed": self.train_seed,
            "group_score": self.group_score,
            "causal_score": self.causal_score,
            "converged": self.converged,
            "base_record_id": self.base_record_id,
            "mask": self.mask,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


def record_id_for(model, dataset_id):
    """Content-addressed id: state hash prefix + kind + dataset id."""
    digest = content_hash(models.model_state(model))
    return f"{digest[:12]}-{model.kind}-{dataset_id}"


def mutate_hyperparams(kind, rng):
    """One random draw of a hyperparameter record for ``kind``.

    Ranges follow the observed spreads of the benchmark sweeps; every
    draw satisfies the record's own validity invariants.
    """
    if kind == models.LOGISTIC_REGRESSION:
        return models.LRParams(
            penalty=str(rng.choice(["l1", "l2", "none"])),
            C=float(10.0 ** rng.uniform(-2.0, 2.0)),
            tol=float(rng.uniform(1e-4, 0.9)),
            max_iter=int(rng.integers(100, 1001)),
            fit_intercept=bool(rng.integers(0, 2)),
            standard_scale=bool(rng.integers(0, 2)),
        )
    if kind == models.DECISION_TREE:
        depth_choices = [None] + list(range(2, 21))
        return models.TreeParams(
            criterion=str(rng.choice(["gini", "entropy"])),
            max_depth=depth_choices[int(rng.integers(0, len(depth_choices)))],
            min_samples_split=int(rng.integers(2, 10)),
            min_samples_leaf=int(rng.integers(1, 6)),
            ccp_alpha=float(rng.uniform(0.0, 1.0)),
            max_features=str(rng.choice(["all", "sqrt", "log2"])),
            seed=None,
        )
    if kind == models.RANDOM_FOREST:
        depth_choices = [None] + list(range(2, 21))
        return models.ForestParams(
            criterion=str(rng.choice(["gini", "entropy"])),
            max_depth=depth_choices[int(rng.integers(0, len(depth_choices)))],
            min_samples_split=int(rng.integers(2, 10)),
            min_samples_leaf=int(rng.integers(1, 6)),
            ccp_alpha=float(rng.uniform(0.0, 1.0)),
            max_features=str(rng.choice(["all", "sqrt", "log2"])),
            n_estimators=int(rng.integers(50, 101)),
            bootstrap=bool(rng.integers(0, 2)),
            seed=None,
        )
    if kind == models.LINEAR_SVM:
        return models.SVMParams(
            C=float(10.0 ** rng.uniform(-3.0, math.log10(5.0))),
            tol=float(rng.uniform(1e-4, 0.9)),
            max_iter=int(rng.integers(100, 1001)),
            standard_scale=bool(rng.integers(0, 2)),
            seed=None,
        )
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass
class SweepResult:
    records: List[ModelRecord]
    trained: List[object]  # aligned with records
    skipped: List[dict]  # {"index": i, "error": str}

    def record_ids(self):
        return [r.record_id for r in self.records]


def model_seed(master_seed, index):
    """Training seed of the index-th sweep slot."""
    return split_seed(master_seed, "model", index)


def _run_one(kind, ds, spec, tag, index, master_seed, themis_n):
    seed = model_seed(master_seed, index)
    hp = mutate_hyperparams(kind, generator(split_seed(master_seed, "hp", index)))
    model = models.train(kind, hp, ds, seed)
    report = metrics.fairness_report(model, ds, spec)
    group_score = None
    causal_score = None
    if themis_n:
        bounds = sampler.bounds_from_dataset(ds)
        themis_seed = split_seed(master_seed, "themis", index)
        group_score = sampler.themis_group_score(
            model, ds.schema, spec, themis_n, themis_seed, bounds
        )
        causal_score = sampler.themis_causal_score(
            model, ds.schema, bounds, spec, themis_n, themis_seed
        )
    record = ModelRecord(
        record_id=record_id_for(model, ds.dataset_id),
        kind=kind,
        hyperparams=hp.to_json(),
        dataset_id=ds.dataset_id,
        sensitive_tag=tag,
        accuracy=report.accuracy,
        aod_signed=report.aod_signed,
        aod=report.aod,
        train_seed=seed,
        group_score=group_score,
        causal_score=causal_score,
        converged=getattr(model, "converged", True),
    )
    return record, model


def run_sweep(kind, ds, spec, n_models, master_seed, tag=None, workers=1, themis_n=None):
    """Train and score ``n_models`` mutated models.

    With ``themis_n`` set, each record also gets sampler-based group and
    causal scores under a per-index derived seed. Training failures
    (e.g. degenerate hyperparameters) are logged and skipped, never
    fatal; undefined fairness rates are a dataset problem and do
    propagate.
    """
    tag = tag if tag is not None else spec.feature_name
    results = [None] * n_models
    skipped = []

    def job(i):
        try:
            return _run_one(kind, ds, spec, tag, i, master_seed, themis_n)
        except UndefinedRate:
            raise
        except FairlensError as exc:
            return ("skip", f"{type(exc).__name__}: {exc}")

    if workers <= 1:
        for i in range(n_models):
            results[i] = job(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(job, range(n_models))):
                results[i] = res

    records = []
    trained = []
    for i, res in enumerate(results):
        if isinstance(res, tuple) and res and res[0] == "skip":
            log.warning("sweep slot %d skipped: %s", i, res[1])
            skipped.append({"index": i, "error": res[1]})
        else:
            record, model = res
            records.append(record)
            trained.append(model)
    return SweepResult(records=records, trained=trained, skipped=skipped)


@dataclass(frozen=True)
class Selection:
    most_unfair: ModelRecord
    most_accurate: ModelRecord
    most_fair: ModelRecord

    def to_json(self):
        return {
            "most_unfair": self.most_unfair.record_id,
            "most_accurate": self.most_accurate.record_id,
            "most_fair": self.most_fair.record_id,
        }


def select(population):
    """Representatives by absolute AOD and accuracy.

    Fairness picks break ties by higher accuracy then lower record_id;
    the accuracy pick breaks ties by lower AOD then lower record_id so
    it always sits on the Pareto front.
    """
    if not population:
        raise ValueError("empty population")
    most_unfair = min(population, key=lambda r: (-r.aod, -r.accuracy, r.record_id))
    most_fair = min(population, key=lambda r: (r.aod, -r.accuracy, r.record_id))
    most_accurate = min(population, key=lambda r: (-r.accuracy, r.aod, r.record_id))
    return Selection(most_unfair=most_unfair, most_accurate=most_accurate, most_fair=most_fair)


def pareto_front(population):
    """Records not dominated in the (accuracy up, |AOD| down) order.

    r is dominated when another record has accuracy >= and aod <= with
    at least one strict inequality. Sort-and-scan over accuracy groups;
    exact duplicates of a front point are kept (nothing dominates them
    strictly).
    """
    by_acc = {}
    for r in population:
        by_acc.setdefault(r.accuracy, []).append(r)
    kept = set()
    best_aod_higher = math.inf
    for acc in sorted(by_acc, reverse=True):
        group = by_acc[acc]
        group_min = min(r.aod for r in group)
        if group_min < best_aod_higher:
            kept.update(id(r) for r in group if r.aod == group_min)
        best_aod_higher = min(best_aod_higher, group_min)
    return [r for r in population if id(r) in kept]
