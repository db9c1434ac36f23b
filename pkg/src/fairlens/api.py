"""JSON-over-HTTP service exposing the full audit loop.

Long-running work (sweeps, sampler runs, remedies) goes through a
polled job queue: the POST returns a job id derived from the request
content, so replaying the same request re-addresses the same job and
every seeded POST is replay-deterministic. Completed jobs are persisted
in the store; restarting the process does not change any response.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import explain as explain_mod
from . import metrics, models, remedy, sampler, sweep
from .dataset import EXCLUDED, MaskSpec, assign_groups, bias_summary, decode_row
from .errors import FairlensError, NotFound
from .jsonutil import content_hash
from .store import Store

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# job queue
# ---------------------------------------------------------------------------


class JobQueue:
    """Bounded worker pool with store-persisted, content-addressed jobs."""

    def __init__(self, store, max_workers=2):
        self.store = store
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self.lock = threading.Lock()
        self.jobs: Dict[str, dict] = {}

    def submit(self, kind, request_json, runner):
        job_id = f"job-{content_hash({'kind': kind, 'request': request_json})[:16]}"
        with self.lock:
            existing = self.get(job_id)
            if existing is not None:
                return existing
            job = {"job_id": job_id, "kind": kind, "status": "queued", "request": request_json}
            self.jobs[job_id] = job
            self.store.save_job(job)

        def run():
            with self.lock:
                self.jobs[job_id] = dict(self.jobs[job_id], status="running")
            try:
                result = runner()
                done = dict(self.jobs[job_id], status="done", result=result)
            except Exception as exc:  # surfaced through the job, not the worker
                log.exception("job %s failed", job_id)
                done = dict(self.jobs[job_id], status="failed", error=f"{type(exc).__name__}: {exc}")
            with self.lock:
                self.jobs[job_id] = done
            self.store.save_job(done)

        self.executor.submit(run)
        return job

    def get(self, job_id):
        job = self.jobs.get(job_id)
        if job is not None:
            return job
        try:
            return self.store.load_job(job_id)
        except NotFound:
            return None


# ---------------------------------------------------------------------------
# request bodies
# ---------------------------------------------------------------------------


class SweepRequest(BaseModel):
    kind: str
    dataset: str
    sensitive: str
    n: int = Field(ge=0, default=10)
    seed: int = 0
    workers: int = Field(ge=1, le=16, default=1)
    themis_n: Optional[int] = Field(default=None, ge=1)


class ExplainConfig(BaseModel):
    n_samples: int = Field(default=5000, ge=10)
    kernel_width: Optional[float] = Field(default=None, gt=0)
    top_k: int = Field(default=10, ge=1)
    seed: int = 0


class ExplainRequest(BaseModel):
    row_index: Optional[int] = Field(default=None, ge=0)
    row: Optional[List[float]] = None
    config: ExplainConfig = ExplainConfig()


class ThemisRequest(BaseModel):
    n: int = Field(default=sampler.DEFAULT_N, ge=1)
    seed: int = 0
    bounds: Optional[Dict[str, List[float]]] = None


class RemedyRequest(BaseModel):
    model_id: str
    mask: Dict[str, Union[str, Dict[str, list]]] = {}
    seed: int = 0
    themis_n: int = Field(default=sampler.DEFAULT_N, ge=1)


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def bias_to_json(summary):
    return {
        "dataset_id": summary.dataset_id,
        "sensitive_feature": summary.sensitive_feature,
        "group_labels": list(summary.group_labels),
        "n_group0": summary.n_group0,
        "n_group1": summary.n_group1,
        "n_excluded": summary.n_excluded,
        "features": [feature_bias_to_json(fb) for fb in summary.features],
    }


def feature_bias_to_json(fb):
    return {
        "feature": fb.feature,
        "correlation": fb.correlation,
        "degenerate": fb.degenerate,
        "is_sensitive": fb.is_sensitive,
        "categories": [
            {
                "label": cs.label,
                "count_group0": cs.count_group0,
                "count_group1": cs.count_group1,
                "share_group1": cs.share_group1,
            }
            for cs in fb.categories
        ],
    }


def create_app(store_dir, cors_origins=("*",), max_workers=2):
    store = Store(store_dir)
    queue = JobQueue(store, max_workers=max_workers)
    app = FastAPI(title="fairlens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.queue = queue

    dataset_cache: Dict[str, object] = {}
    cache_lock = threading.Lock()
    # one remedy at a time per base record; independent records in parallel
    remedy_locks: Dict[str, threading.Lock] = {}
    remedy_locks_guard = threading.Lock()

    def remedy_lock(record_id):
        with remedy_locks_guard:
            return remedy_locks.setdefault(record_id, threading.Lock())

    def get_dataset(dataset_id):
        with cache_lock:
            if dataset_id in dataset_cache:
                return dataset_cache[dataset_id]
        try:
            ds = store.load_dataset(dataset_id)
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        with cache_lock:
            dataset_cache[dataset_id] = ds
        return ds

    def get_spec(dataset_id, tag, schema):
        try:
            return store.load_sensitive_spec(dataset_id, tag, schema)
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    def get_record(record_id):
        try:
            return store.load_record(record_id)
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    def domain_422(exc, loc):
        raise HTTPException(
            status_code=422,
            detail=[{"loc": loc, "msg": str(exc), "type": type(exc).__name__}],
        )

    # -- datasets -----------------------------------------------------------

    @app.get("/datasets")
    def list_datasets():
        out = []
        for dataset_id in store.list_datasets():
            ds = get_dataset(dataset_id)
            out.append(
                {
                    "dataset_id": dataset_id,
                    "n_rows": ds.n_rows,
                    "n_features": ds.schema.n_features,
                    "label": ds.schema.to_json()["label"],
                    "sensitive_tags": store.list_sensitive_tags(dataset_id),
                }
            )
        return {"datasets": out}

    @app.get("/datasets/{dataset_id}")
    def dataset_detail(dataset_id: str):
        ds = get_dataset(dataset_id)
        return {
            "dataset_id": dataset_id,
            "n_rows": ds.n_rows,
            "schema": ds.schema.to_json(),
            "sensitive_tags": store.list_sensitive_tags(dataset_id),
        }

    @app.get("/datasets/{dataset_id}/bias")
    def dataset_bias(dataset_id: str, sensitive: str):
        ds = get_dataset(dataset_id)
        spec = get_spec(dataset_id, sensitive, ds.schema)
        try:
            summary = bias_summary(ds, spec)
        except FairlensError as exc:
            domain_422(exc, ["query", "sensitive"])
        return bias_to_json(summary)

    @app.get("/datasets/{dataset_id}/features/{feature}/histogram")
    def feature_histogram(dataset_id: str, feature: str, sensitive: str):
        ds = get_dataset(dataset_id)
        spec = get_spec(dataset_id, sensitive, ds.schema)
        try:
            summary = bias_summary(ds, spec)
        except FairlensError as exc:
            domain_422(exc, ["query", "sensitive"])
        for fb in summary.features:
            if fb.feature == feature:
                return {
                    "dataset_id": dataset_id,
                    "group_labels": list(summary.group_labels),
                    **feature_bias_to_json(fb),
                }
        raise HTTPException(status_code=404, detail=f"no feature named {feature!r}")

    # -- sweeps ---------------------------------------------------------------

    @app.post("/sweeps")
    def post_sweep(req: SweepRequest):
        if req.kind not in models.MODEL_KINDS:
            domain_422(ValueError(f"unknown kind {req.kind!r}"), ["body", "kind"])
        ds = get_dataset(req.dataset)
        spec = get_spec(req.dataset, req.sensitive, ds.schema)
        request_json = req.model_dump()

        def run():
            result = sweep.run_sweep(
                req.kind,
                ds,
                spec,
                req.n,
                req.seed,
                tag=req.sensitive,
                workers=req.workers,
                themis_n=req.themis_n,
            )
            for record, model in zip(result.records, result.trained):
                store.save_record(record, model)
            manifest = {
                "config": request_json,
                "record_ids": result.record_ids(),
                "skipped": result.skipped,
            }
            sweep_id = store.save_sweep(manifest)
            selection = sweep.select(result.records).to_json() if result.records else None
            front = [r.record_id for r in sweep.pareto_front(result.records)]
            return {
                "sweep_id": sweep_id,
                "config": request_json,
                "record_ids": result.record_ids(),
                "skipped": result.skipped,
                "selection": selection,
                "pareto_front": front,
                "records": [r.to_json() for r in result.records],
            }

        return queue.submit("sweep", request_json, run)

    @app.get("/sweeps/{sweep_id}")
    def get_sweep(sweep_id: str):
        job = queue.get(sweep_id)
        if job is not None:
            return job
        try:
            manifest = store.load_sweep(sweep_id)
        except NotFound:
            raise HTTPException(status_code=404, detail=f"no sweep or job {sweep_id!r}")
        return {"job_id": None, "kind": "sweep", "status": "done", "result": manifest}

    # -- models ---------------------------------------------------------------

    @app.get("/models")
    def list_models(dataset: Optional[str] = None, kind: Optional[str] = None, sensitive: Optional[str] = None):
        records = store.list_records(dataset_id=dataset, kind=kind, tag=sensitive)
        return {"models": [r.to_json() for r in records]}

    @app.get("/models/{record_id}")
    def model_detail(record_id: str, depth: Optional[int] = None):
        record, model = get_record(record_id)
        ds = get_dataset(record.dataset_id)
        logic = models.export_logic(
            model, ds.schema.feature_names, display_depth=depth if depth is not None else 4
        )
        return {"record": record.to_json(), "logic": logic.to_json()}

    @app.get("/models/{record_id}/predictions")
    def model_predictions(record_id: str, dataset: Optional[str] = None):
        record, model = get_record(record_id)
        ds = get_dataset(dataset or record.dataset_id)
        spec = get_spec(ds.dataset_id, record.sensitive_tag, ds.schema)
        try:
            groups = assign_groups(ds, spec)
            cf = set(metrics.counterfactual_set(model, ds, spec).tolist())
        except FairlensError as exc:
            domain_422(exc, ["query", "dataset"])
        probs = models.predict_proba_batch(model, ds.matrix)
        rows = [
            {
                "index": i,
                "probability": float(probs[i]),
                "predicted": int(probs[i] >= 0.5),
                "label": int(ds.labels[i]),
                "group": int(groups[i]) if groups[i] != EXCLUDED else None,
                "counterfactual": i in cf,
            }
            for i in range(ds.n_rows)
        ]
        return {"dataset_id": ds.dataset_id, "model_id": record_id, "rows": rows}

    @app.post("/models/{record_id}/explain")
    def model_explain(record_id: str, req: ExplainRequest):
        record, model = get_record(record_id)
        ds = get_dataset(record.dataset_id)
        if (req.row_index is None) == (req.row is None):
            domain_422(ValueError("provide exactly one of row_index or row"), ["body"])
        if req.row_index is not None:
            if req.row_index >= ds.n_rows:
                domain_422(ValueError(f"row_index {req.row_index} out of range"), ["body", "row_index"])
            instance = ds.matrix[req.row_index]
        else:
            if len(req.row) != ds.schema.n_features:
                domain_422(ValueError("row length mismatch"), ["body", "row"])
            instance = req.row
        cfg = explain_mod.PerturbationConfig(
            n_samples=req.config.n_samples,
            kernel_width=req.config.kernel_width,
            top_k=req.config.top_k,
            seed=req.config.seed,
        )
        try:
            explanation = explain_mod.explain_point(model, instance, ds, cfg)
        except FairlensError as exc:
            domain_422(exc, ["body"])
        return {
            "model_id": record_id,
            "row_index": req.row_index,
            "config": req.config.model_dump(),
            "explanation": explanation.to_json(),
        }

    @app.get("/models/{record_id}/counterfactuals")
    def model_counterfactuals(record_id: str, k: int = 15, seed: int = 0):
        record, model = get_record(record_id)
        ds = get_dataset(record.dataset_id)
        spec = get_spec(ds.dataset_id, record.sensitive_tag, ds.schema)
        try:
            sample = explain_mod.sample_counterfactual_points(model, ds, spec, k=k, seed=seed)
        except FairlensError as exc:
            domain_422(exc, ["query"])
        return {
            "model_id": record_id,
            "k": k,
            "seed": seed,
            "indices": [int(i) for i in sample.indices],
            "shortfall": sample.shortfall,
            "rows": [decode_row(ds, int(i)) for i in sample.indices],
        }

    @app.get("/models/{record_id}/suggested-masks")
    def model_suggested_masks(record_id: str, n: int = 10, seed: int = 0, n_samples: int = 1000):
        record, model = get_record(record_id)
        ds = get_dataset(record.dataset_id)
        spec = get_spec(ds.dataset_id, record.sensitive_tag, ds.schema)
        cfg = explain_mod.PerturbationConfig(n_samples=max(n_samples, 10), seed=seed)
        try:
            suggestions = remedy.suggest_masks(model, ds, spec, cfg, top_n=n)
        except FairlensError as exc:
            domain_422(exc, ["query"])
        return {"model_id": record_id, "suggestions": [s.to_json() for s in suggestions]}

    @app.post("/models/{record_id}/themis")
    def model_themis(record_id: str, req: ThemisRequest):
        record, model = get_record(record_id)
        ds = get_dataset(record.dataset_id)
        spec = get_spec(ds.dataset_id, record.sensitive_tag, ds.schema)
        bounds = None
        if req.bounds is not None:
            bounds = {name: (lo, hi) for name, (lo, hi) in req.bounds.items()}
        request_json = dict(req.model_dump(), model_id=record_id)

        def run():
            use_bounds = bounds if bounds is not None else sampler.bounds_from_dataset(ds)
            group = sampler.themis_group_score(model, ds.schema, spec, req.n, req.seed, use_bounds)
            causal = sampler.themis_causal_score(model, ds.schema, use_bounds, spec, req.n, req.seed)
            return {
                "model_id": record_id,
                "n": req.n,
                "seed": req.seed,
                "group_score": group,
                "causal_score": causal,
            }

        return queue.submit("themis", request_json, run)

    # -- remedies ---------------------------------------------------------------

    @app.post("/remedies")
    def post_remedy(req: RemedyRequest):
        record, model = get_record(req.model_id)
        ds = get_dataset(record.dataset_id)
        spec = get_spec(ds.dataset_id, record.sensitive_tag, ds.schema)
        try:
            mask = MaskSpec.from_json(req.mask, ds.schema)
        except FairlensError as exc:
            domain_422(exc, ["body", "mask"])
        request_json = req.model_dump()

        def run():
            with remedy_lock(record.record_id):
                result, _ = remedy.apply_remedy(
                    record, mask, ds, spec, req.seed, model=model, store=store, themis_n=req.themis_n
                )
            payload = result.to_json()
            remedy_id = store.save_remedy(payload)
            return dict(payload, remedy_id=remedy_id)

        return queue.submit("remedy", request_json, run)

    @app.get("/remedies/{remedy_id}")
    def get_remedy(remedy_id: str):
        job = queue.get(remedy_id)
        if job is not None:
            return job
        try:
            payload = store.load_remedy(remedy_id)
        except NotFound:
            raise HTTPException(status_code=404, detail=f"no remedy or job {remedy_id!r}")
        return {"job_id": None, "kind": "remedy", "status": "done", "result": payload}

    return app
