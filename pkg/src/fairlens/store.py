"""Filesystem persistence for datasets, models, sweeps, and remedies.

Layout under the store directory:

    datasets/{dataset_id}.dataset.json
    datasets/{dataset_id}.sensitive.{tag}.json
    models/{record_id}.model.json + {record_id}.meta.json
    sweeps/{sweep_id}.json
    remedies/{remedy_id}.json
    jobs/{job_id}.json

Model files are canonical JSON and the record id embeds a hash of the
file content, so corruption is detectable on load. Writes go through a
temp file + rename; one writer per store directory, any number of
readers.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import models as models_mod
from .dataset import Dataset, DatasetSchema, SensitiveSpec
from .errors import CorruptRecord, NotFound
from .jsonutil import canonical_json, content_hash
from .sweep import ModelRecord, record_id_for

_SUBDIRS = ("datasets", "models", "sweeps", "remedies", "jobs")


class Store:
    def __init__(self, root):
        self.root = Path(root)
        for sub in _SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # -- plumbing -----------------------------------------------------------

    def _write_atomic(self, path, text):
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _read_json(self, path, kind_label):
        if not path.exists():
            raise NotFound(f"{kind_label} not found: {path.name}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    # -- datasets -----------------------------------------------------------

    def save_dataset(self, ds):
        payload = {
            "schema": ds.schema.to_json(),
            "matrix": [[float(v) for v in row] for row in ds.matrix],
            "labels": [int(v) for v in ds.labels],
        }
        path = self.root / "datasets" / f"{ds.dataset_id}.dataset.json"
        self._write_atomic(path, canonical_json(payload))
        return ds.dataset_id

    def load_dataset(self, dataset_id):
        path = self.root / "datasets" / f"{dataset_id}.dataset.json"
        obj = self._read_json(path, "dataset")
        return Dataset(
            schema=DatasetSchema.from_json(obj["schema"]),
            matrix=np.array(obj["matrix"], dtype=np.float64),
            labels=np.array(obj["labels"], dtype=np.int64),
        )

    def list_datasets(self):
        out = []
        for path in sorted((self.root / "datasets").glob("*.dataset.json")):
            out.append(path.name[: -len(".dataset.json")])
        return out

    def save_sensitive_spec(self, dataset_id, tag, spec, schema=None):
        path = self.root / "datasets" / f"{dataset_id}.sensitive.{tag}.json"
        self._write_atomic(path, canonical_json(spec.to_json(schema)))
        return tag

    def load_sensitive_spec(self, dataset_id, tag, schema):
        path = self.root / "datasets" / f"{dataset_id}.sensitive.{tag}.json"
        return SensitiveSpec.from_json(self._read_json(path, "sensitive spec"), schema)

    def list_sensitive_tags(self, dataset_id):
        prefix = f"{dataset_id}.sensitive."
        out = []
        for path in sorted((self.root / "datasets").glob(f"{prefix}*.json")):
            out.append(path.name[len(prefix) : -len(".json")])
        return out

    # -- models -------------------------------------------------------------

    def save_record(self, record, model):
        """Persist model state + metadata; returns the content-derived id.

        The record's id must match the model it travels with.
        """
        expected = record_id_for(model, record.dataset_id)
        if record.record_id != expected:
            raise CorruptRecord(
                f"record id {record.record_id} does not match model content {expected}"
            )
        state_text = canonical_json(models_mod.model_state(model))
        self._write_atomic(self.root / "models" / f"{record.record_id}.model.json", state_text)
        self._write_atomic(
            self.root / "models" / f"{record.record_id}.meta.json",
            canonical_json(record.to_json()),
        )
        return record.record_id

    def load_record(self, record_id):
        meta_path = self.root / "models" / f"{record_id}.meta.json"
        model_path = self.root / "models" / f"{record_id}.model.json"
        record = ModelRecord.from_json(self._read_json(meta_path, "model record"))
        state = self._read_json(model_path, "model state")
        expected_prefix = content_hash(state)[:12]
        if not record_id.startswith(expected_prefix):
            raise CorruptRecord(f"content hash mismatch for {record_id}")
        return record, models_mod.model_from_state(state)

    def list_records(self, dataset_id=None, kind=None, tag=None):
        out = []
        for path in sorted((self.root / "models").glob("*.meta.json")):
            record = ModelRecord.from_json(self._read_json(path, "model record"))
            if dataset_id is not None and record.dataset_id != dataset_id:
                continue
            if kind is not None and record.kind != kind:
                continue
            if tag is not None and record.sensitive_tag != tag:
                continue
            out.append(record)
        return out

    # -- sweeps and remedies --------------------------------------------------

    def save_sweep(self, manifest):
        sweep_id = manifest.get("sweep_id") or f"sweep-{content_hash(manifest)[:16]}"
        manifest = dict(manifest, sweep_id=sweep_id)
        self._write_atomic(self.root / "sweeps" / f"{sweep_id}.json", canonical_json(manifest))
        return sweep_id

    def load_sweep(self, sweep_id):
        return self._read_json(self.root / "sweeps" / f"{sweep_id}.json", "sweep manifest")

    def list_sweeps(self):
        return [p.name[:-5] for p in sorted((self.root / "sweeps").glob("*.json"))]

    def save_remedy(self, result_json):
        remedy_id = result_json.get("remedy_id") or f"remedy-{content_hash(result_json)[:16]}"
        result_json = dict(result_json, remedy_id=remedy_id)
        self._write_atomic(
            self.root / "remedies" / f"{remedy_id}.json", canonical_json(result_json)
        )
        return remedy_id

    def load_remedy(self, remedy_id):
        return self._read_json(self.root / "remedies" / f"{remedy_id}.json", "remedy result")

    # -- jobs -----------------------------------------------------------------

    def save_job(self, job_json):
        self._write_atomic(
            self.root / "jobs" / f"{job_json['job_id']}.json", canonical_json(job_json)
        )

    def load_job(self, job_id):
        return self._read_json(self.root / "jobs" / f"{job_id}.json", "job")

    def list_jobs(self):
        return [p.name[:-5] for p in sorted((self.root / "jobs").glob("*.json"))]
