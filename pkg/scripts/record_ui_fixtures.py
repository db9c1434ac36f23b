#!/usr/bin/env python3
"""Record API responses as fixtures for the frontend test suite.

Builds a seeded store (the synthetic proxy dataset plus a small model
population), boots the service in-process, and captures the JSON bodies
the three UI views consume into frontend/tests/fixtures/.
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient

from conftest import make_proxy_dataset, proxy_spec
from fairlens import sweep
from fairlens.api import create_app
from fairlens.store import Store

OUT = REPO / "frontend" / "tests" / "fixtures"


def wait_job(client, job_id, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/sweeps/{job_id}").json()
        if body["status"] in ("done", "failed"):
            assert body["status"] == "done", body
            return body
        time.sleep(0.05)
    raise TimeoutError(job_id)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    store_dir = REPO / "frontend" / "tests" / ".fixture-store"
    store = Store(store_dir)
    ds = make_proxy_dataset(n=600, dataset_id="proxy")
    spec = proxy_spec()
    store.save_dataset(ds)
    store.save_sensitive_spec("proxy", "x1", spec, ds.schema)

    client = TestClient(create_app(store_dir, max_workers=2))

    def save(name, payload):
        (OUT / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        print(f"wrote {name}.json")

    save("datasets", client.get("/datasets").json())
    save("dataset_detail", client.get("/datasets/proxy").json())
    save("bias", client.get("/datasets/proxy/bias", params={"sensitive": "x1"}).json())
    save(
        "histogram_x2",
        client.get("/datasets/proxy/features/x2/histogram", params={"sensitive": "x1"}).json(),
    )
    save(
        "histogram_x1",
        client.get("/datasets/proxy/features/x1/histogram", params={"sensitive": "x1"}).json(),
    )

    sweep_req = {"kind": "LogisticRegression", "dataset": "proxy", "sensitive": "x1", "n": 6, "seed": 2019}
    job = client.post("/sweeps", json=sweep_req).json()
    sweep_done = wait_job(client, job["job_id"])
    save("sweep_job", sweep_done)

    unfair_id = sweep_done["result"]["selection"]["most_unfair"]
    save("model_detail", client.get(f"/models/{unfair_id}").json())

    # tree fixtures come from the noisy proxy so trees grow deep enough
    # for the depth selector to truncate something
    noisy = make_proxy_dataset(n=600, noise=0.1, dataset_id="proxy-noisy")
    store.save_dataset(noisy)
    store.save_sensitive_spec("proxy-noisy", "x1", spec, noisy.schema)
    tree_req = {"kind": "DecisionTree", "dataset": "proxy-noisy", "sensitive": "x1", "n": 6, "seed": 7}
    tree_job = wait_job(client, client.post("/sweeps", json=tree_req).json()["job_id"])
    save("sweep_job_tree", tree_job)

    # a guaranteed-deep unpruned tree for the depth-selector fixture
    from fairlens import metrics
    from fairlens import models as models_mod

    deep_hp = models_mod.TreeParams(max_depth=None, ccp_alpha=0.0, min_samples_leaf=1)
    deep_model = models_mod.train("DecisionTree", deep_hp, noisy, 99)
    report = metrics.fairness_report(deep_model, noisy, spec)
    deep_record = sweep.ModelRecord(
        record_id=sweep.record_id_for(deep_model, "proxy-noisy"),
        kind="DecisionTree",
        hyperparams=deep_hp.to_json(),
        dataset_id="proxy-noisy",
        sensitive_tag="x1",
        accuracy=report.accuracy,
        aod_signed=report.aod_signed,
        aod=report.aod,
        train_seed=99,
    )
    store.save_record(deep_record, deep_model)
    assert deep_model.max_depth_actual >= 3
    tree_id = deep_record.record_id
    save("model_detail_tree", client.get(f"/models/{tree_id}").json())
    save("model_detail_tree_depth1", client.get(f"/models/{tree_id}", params={"depth": 1}).json())

    save("predictions", client.get(f"/models/{unfair_id}/predictions").json())
    explain_req = {"row_index": 5, "config": {"n_samples": 800, "seed": 11}}
    save("explanation", client.post(f"/models/{unfair_id}/explain", json=explain_req).json())
    custom_req = {"row": [1.0, -0.25], "config": {"n_samples": 800, "seed": 12}}
    save("explanation_custom", client.post(f"/models/{unfair_id}/explain", json=custom_req).json())
    save(
        "counterfactuals",
        client.get(f"/models/{unfair_id}/counterfactuals", params={"k": 10, "seed": 3}).json(),
    )
    save(
        "suggested_masks",
        client.get(f"/models/{unfair_id}/suggested-masks", params={"n": 5, "seed": 1}).json(),
    )

    empty_req = {"model_id": unfair_id, "mask": {}, "seed": 9, "themis_n": 800}
    empty_job = client.post("/remedies", json=empty_req).json()
    done = wait_job(client, empty_job["job_id"])
    save("remedy_empty", done)

    mask_req = {"model_id": unfair_id, "mask": {"x1": "all"}, "seed": 9, "themis_n": 800}
    mask_job = client.post("/remedies", json=mask_req).json()
    save("remedy_masked", wait_job(client, mask_job["job_id"]))

    print("fixtures recorded")


if __name__ == "__main__":
    main()
