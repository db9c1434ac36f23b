"""Command-line interface for the audit loop."""

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import explain as explain_mod
from . import models, remedy, sampler, sweep
from .dataset import DatasetSchema, MaskSpec, SensitiveSpec, load_dataset
from .errors import FairlensError
from .store import Store

STORE_OPTION = click.option(
    "--store-dir",
    envvar="FAIRLENS_STORE",
    default="store",
    show_default=True,
    help="Store directory (env FAIRLENS_STORE).",
)
SEED_OPTION = click.option("--seed", default=0, show_default=True, help="Random seed.")


@click.group()
def main():
    """Audit, explain, and remedy unfairness in tabular classifiers."""


@main.command()
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--sensitive",
    "sensitive_paths",
    multiple=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Sensitive spec JSON; repeatable.",
)
@STORE_OPTION
@SEED_OPTION
def ingest(csv_path, schema_path, sensitive_paths, store_dir, seed):
    """Load a CSV against a schema and persist the encoded dataset."""
    del seed  # ingest is deterministic; accepted for interface uniformity
    schema = DatasetSchema.from_json(json.loads(Path(schema_path).read_text()))
    ds = load_dataset(Path(csv_path).read_text(), schema)
    store = Store(store_dir)
    store.save_dataset(ds)
    for path in sensitive_paths:
        spec = SensitiveSpec.from_json(json.loads(Path(path).read_text()), schema)
        store.save_sensitive_spec(ds.dataset_id, spec.feature_name, spec, schema)
    click.echo(f"ingested {ds.dataset_id}: {ds.n_rows} rows, {ds.schema.n_features} features")


@main.command(name="sweep")
@click.option("--dataset", required=True)
@click.option("--kind", required=True, type=click.Choice(models.MODEL_KINDS))
@click.option("--sensitive", required=True, help="Sensitive spec tag.")
@click.option("--n", default=10, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--themis-n", default=None, type=int, help="Also score each model with the sampler.")
@STORE_OPTION
@SEED_OPTION
def sweep_cmd(dataset, kind, sensitive, n, workers, themis_n, store_dir, seed):
    """Train a population of mutated models and persist it."""
    store = Store(store_dir)
    ds = store.load_dataset(dataset)
    spec = store.load_sensitive_spec(dataset, sensitive, ds.schema)
    result = sweep.run_sweep(
        kind, ds, spec, n, seed, tag=sensitive, workers=workers, themis_n=themis_n
    )
    for record, model in zip(result.records, result.trained):
        store.save_record(record, model)
    manifest = {
        "config": {
            "kind": kind,
            "dataset": dataset,
            "sensitive": sensitive,
            "n": n,
            "seed": seed,
            "themis_n": themis_n,
        },
        "record_ids": result.record_ids(),
        "skipped": result.skipped,
    }
    sweep_id = store.save_sweep(manifest)
    if result.records:
        sel = sweep.select(result.records)
        click.echo(f"sweep {sweep_id}: {len(result.records)} models ({len(result.skipped)} skipped)")
        click.echo(f"most_unfair   {sel.most_unfair.record_id}  aod={sel.most_unfair.aod:.4f}")
        click.echo(f"most_accurate {sel.most_accurate.record_id}  score={sel.most_accurate.accuracy:.4f}")
        click.echo(f"most_fair     {sel.most_fair.record_id}  aod={sel.most_fair.aod:.4f}")
    else:
        click.echo(f"sweep {sweep_id}: no models trained ({len(result.skipped)} skipped)")


@main.command()
@click.option("--dataset", default=None)
@click.option("--kind", default=None)
@click.option("--sensitive", default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write CSV here instead of stdout.")
@STORE_OPTION
@SEED_OPTION
def report(dataset, kind, sensitive, out, store_dir, seed):
    """Emit the stored records as a score/AOD/group/causal CSV table."""
    del seed
    store = Store(store_dir)
    records = store.list_records(dataset_id=dataset, kind=kind, tag=sensitive)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["score", "AOD", "group_score", "causal_score", "dataset", "model", "record_id"])
    for r in records:
        writer.writerow(
            [
                f"{r.accuracy:.6g}",
                f"{r.aod:.6g}",
                "" if r.group_score is None else f"{r.group_score:.6g}",
                "" if r.causal_score is None else f"{r.causal_score:.6g}",
                r.dataset_id,
                r.kind,
                r.record_id,
            ]
        )
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {len(records)} rows to {out}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--model", "model_id", required=True)
@click.option("--row-index", type=int, default=None)
@click.option("--row", default=None, help="Comma-separated encoded feature values.")
@click.option("--n-samples", default=5000, show_default=True)
@click.option("--top-k", default=10, show_default=True)
@STORE_OPTION
@SEED_OPTION
def explain(model_id, row_index, row, n_samples, top_k, store_dir, seed):
    """Explain one prediction with the local surrogate."""
    store = Store(store_dir)
    record, model = store.load_record(model_id)
    ds = store.load_dataset(record.dataset_id)
    if (row_index is None) == (row is None):
        raise click.UsageError("provide exactly one of --row-index / --row")
    instance = ds.matrix[row_index] if row_index is not None else [float(v) for v in row.split(",")]
    cfg = explain_mod.PerturbationConfig(n_samples=n_samples, top_k=top_k, seed=seed)
    explanation = explain_mod.explain_point(model, instance, ds, cfg)
    click.echo(json.dumps(explanation.to_json(), indent=2))


@main.command(name="remedy")
@click.option("--model", "model_id", required=True)
@click.option("--mask", "mask_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--themis-n", default=sampler.DEFAULT_N, show_default=True)
@STORE_OPTION
@SEED_OPTION
def remedy_cmd(model_id, mask_path, themis_n, store_dir, seed):
    """Mask, retrain, and compare fairness before/after."""
    store = Store(store_dir)
    record, model = store.load_record(model_id)
    ds = store.load_dataset(record.dataset_id)
    spec = store.load_sensitive_spec(record.dataset_id, record.sensitive_tag, ds.schema)
    mask = MaskSpec.from_json(json.loads(Path(mask_path).read_text()), ds.schema)
    result, _ = remedy.apply_remedy(
        record, mask, ds, spec, seed, model=model, store=store, themis_n=themis_n
    )
    payload = result.to_json()
    remedy_id = store.save_remedy(payload)
    click.echo(json.dumps(dict(payload, remedy_id=remedy_id), indent=2))


@main.command()
@click.option("--model", "model_id", required=True)
@click.option("--n", default=sampler.DEFAULT_N, show_default=True)
@STORE_OPTION
@SEED_OPTION
def themis(model_id, n, store_dir, seed):
    """Sampler-based group and causal scores for a stored model."""
    store = Store(store_dir)
    record, model = store.load_record(model_id)
    ds = store.load_dataset(record.dataset_id)
    spec = store.load_sensitive_spec(record.dataset_id, record.sensitive_tag, ds.schema)
    bounds = sampler.bounds_from_dataset(ds)
    group = sampler.themis_group_score(model, ds.schema, spec, n, seed, bounds)
    causal = sampler.themis_causal_score(model, ds.schema, bounds, spec, n, seed)
    click.echo(json.dumps({"model_id": model_id, "n": n, "seed": seed, "group_score": group, "causal_score": causal}, indent=2))


@main.command()
@click.option("--port", envvar="FAIRLENS_PORT", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--cors-origin", multiple=True, default=("*",), show_default=True)
@click.option("--workers", default=2, show_default=True, help="Job queue worker threads.")
@STORE_OPTION
@SEED_OPTION
def serve(port, host, cors_origin, workers, store_dir, seed):
    """Run the HTTP service."""
    del seed
    import uvicorn

    from .api import create_app

    app = create_app(store_dir, cors_origins=cors_origin, max_workers=workers)
    uvicorn.run(app, host=host, port=port)


def run():
    try:
        main(standalone_mode=True)
    except FairlensError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
