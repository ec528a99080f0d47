"""Grading service: dataset lifecycle, train/score jobs, pivots, crash safety."""

import io
import json
import time

import pytest
from fastapi.testclient import TestClient

from asag.corpus import read_pairs_csv, write_pairs_csv
from asag.service import ServiceConfig, create_app, load_service_config

from conftest import synthetic_corpus


def make_client(tmp_path, **overrides):
    config = ServiceConfig(
        data_dir=tmp_path / "data",
        provider_spec="hash:64",
        train_overrides={"lr_peak": 3e-3, "max_epochs": 6, "max_restarts": 2, **overrides.pop("train", {})},
        head_overrides={"hidden_dims": [64], "dropout_p": 0.1, "seed": 42},
        **overrides,
    )
    app = create_app(config)
    return TestClient(app), app.state.service


def corpus_csv_bytes(corpus, include_scores=True):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "c.csv"
        write_pairs_csv(corpus, path, include_scores=include_scores)
        return path.read_bytes()


def wait_for(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/v1/jobs/{job_id}").json()
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not finish")


@pytest.fixture(scope="module")
def learnable_small():
    return synthetic_corpus(n_pairs=200, n_questions=10, dim=64, noise_sigma=0.02, seed=321)


def test_dataset_lifecycle(tmp_path):
    client, _ = make_client(tmp_path)
    created = client.post("/api/v1/datasets", json={"name": "cs101", "score_max": 5})
    assert created.status_code == 201
    assert created.json()["name"] == "cs101"
    assert (tmp_path / "data" / "cs101" / "meta.json").is_file()

    assert client.post("/api/v1/datasets", json={"name": "cs101", "score_max": 5}).status_code == 409
    assert client.post("/api/v1/datasets", json={"name": "CS 101!", "score_max": 5}).status_code == 400
    assert client.post("/api/v1/datasets", json={"name": "ok", "score_max": -1}).status_code == 400

    listed = client.get("/api/v1/datasets").json()["datasets"]
    assert [d["name"] for d in listed] == ["cs101"]
    assert client.get("/api/v1/datasets/cs101").status_code == 200
    assert client.get("/api/v1/datasets/ghost").status_code == 404


def test_train_score_download_pivot(tmp_path, learnable_small):
    corpus, _provider = learnable_small
    client, service = make_client(tmp_path, train={"max_epochs": 12, "abort_epoch": 6})
    client.post("/api/v1/datasets", json={"name": "demo", "score_max": 5})

    # train
    response = client.post(
        "/api/v1/datasets/demo/train",
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    assert response.status_code == 202
    job = wait_for(client, response.json()["id"])
    assert job["state"] == "done", job["error"]
    assert job["result"]["accepted"] is True
    assert (tmp_path / "data" / "demo" / "model.ckpt").is_file()
    assert (tmp_path / "data" / "demo" / "train.csv").is_file()

    # learning curve exposed on the job
    assert len(job["curve"]) >= 1
    first = job["curve"][0]
    for key in ("attempt", "epoch", "train_loss", "val_loss", "val_rmse_scaled", "val_pearson"):
        assert key in first

    # score the training rows: near-gold on a learnable corpus
    response = client.post(
        "/api/v1/datasets/demo/score",
        files={"file": ("test.csv", io.BytesIO(corpus_csv_bytes(corpus, include_scores=False)), "text/csv")},
    )
    assert response.status_code == 202
    score_job = wait_for(client, response.json()["id"])
    assert score_job["state"] == "done", score_job["error"]

    rows = client.get(f"/api/v1/datasets/demo/results/{score_job['id']}").json()["rows"]
    assert len(rows) == len(corpus)
    assert [r["id"] for r in rows] == [p.id for p in corpus]  # order preserved
    gold = {p.id: p.gold_score for p in corpus}
    scaled_err = [(r["score"] - gold[r["id"]]) / 5.0 for r in rows]
    rmse_scaled = (sum(e * e for e in scaled_err) / len(scaled_err)) ** 0.5
    assert rmse_scaled < 0.05

    # download is a well-formed scored CSV
    download = client.get(f"/api/v1/datasets/demo/results/{score_job['id']}/csv")
    assert download.status_code == 200
    assert download.headers["content-type"].startswith("text/csv")
    body = download.text.splitlines()
    assert body[0] == "id,question_id,question_text,reference_answer,student_answer,score"
    assert len(body) == len(corpus) + 1

    # pivot aggregations
    pivot = client.get(
        f"/api/v1/datasets/demo/pivot", params={"job": score_job["id"], "by": "question_id", "agg": "count"}
    ).json()
    assert pivot["totals"]["count"] == len(corpus)
    assert sum(g["value"] for g in pivot["groups"]) == len(corpus)
    keys = [g["key"] for g in pivot["groups"]]
    assert keys == sorted(keys)

    mean_pivot = client.get(
        f"/api/v1/datasets/demo/pivot", params={"job": score_job["id"], "by": "question_id", "agg": "mean"}
    ).json()
    one_group = mean_pivot["groups"][0]
    group_rows = [r["score"] for r in rows if r["question_id"] == one_group["key"]]
    assert one_group["value"] == pytest.approx(sum(group_rows) / len(group_rows))

    assert client.get(
        f"/api/v1/datasets/demo/pivot", params={"job": score_job["id"], "by": "student_answer"}
    ).status_code == 400
    assert client.get(
        f"/api/v1/datasets/demo/pivot", params={"job": score_job["id"], "agg": "median"}
    ).status_code == 400


def test_score_before_train_is_409(tmp_path, learnable_small):
    corpus, _ = learnable_small
    client, _ = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "early", "score_max": 5})
    response = client.post(
        "/api/v1/datasets/early/score",
        files={"file": ("t.csv", io.BytesIO(corpus_csv_bytes(corpus, include_scores=False)), "text/csv")},
    )
    assert response.status_code == 409
    assert "train" in response.json()["detail"]


def test_csv_validation_422(tmp_path):
    client, _ = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "bad", "score_max": 5})
    missing_score = b"id,question_id,question_text,reference_answer,student_answer\na,q,t,r,s\n"
    response = client.post(
        "/api/v1/datasets/bad/train",
        files={"file": ("train.csv", io.BytesIO(missing_score), "text/csv")},
    )
    assert response.status_code == 422
    assert "score" in response.json()["detail"]

    out_of_range = (
        b"id,question_id,question_text,reference_answer,student_answer,score\na,q,t,r,s,9.0\n"
    )
    response = client.post(
        "/api/v1/datasets/bad/train",
        files={"file": ("train.csv", io.BytesIO(out_of_range), "text/csv")},
    )
    assert response.status_code == 422
    assert "line 2" in response.json()["detail"]


def test_concurrent_train_conflict(tmp_path, learnable_small):
    corpus, _ = learnable_small
    client, _ = make_client(tmp_path, train={"max_epochs": 12, "abort_epoch": 6, "max_restarts": 1})
    client.post("/api/v1/datasets", json={"name": "busy", "score_max": 5})
    payload = corpus_csv_bytes(corpus)
    first = client.post(
        "/api/v1/datasets/busy/train",
        files={"file": ("train.csv", io.BytesIO(payload), "text/csv")},
    )
    assert first.status_code == 202
    second = client.post(
        "/api/v1/datasets/busy/train",
        files={"file": ("train.csv", io.BytesIO(payload), "text/csv")},
    )
    assert second.status_code == 409
    wait_for(client, first.json()["id"])


def test_unknown_job_404(tmp_path):
    client, _ = make_client(tmp_path)
    assert client.get("/api/v1/jobs/nope").status_code == 404


def test_forest_pipeline(tmp_path, learnable_small):
    corpus, _ = learnable_small
    client, _ = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "woods", "score_max": 5})
    response = client.post(
        "/api/v1/datasets/woods/train",
        params={"pipeline": "features-forest"},
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    job = wait_for(client, response.json()["id"])
    assert job["state"] == "done", job["error"]
    assert job["result"]["pipeline"] == "features-forest"

    score = client.post(
        "/api/v1/datasets/woods/score",
        files={"file": ("t.csv", io.BytesIO(corpus_csv_bytes(corpus, include_scores=False)), "text/csv")},
    )
    score_job = wait_for(client, score.json()["id"])
    assert score_job["state"] == "done", score_job["error"]
    rows = client.get(f"/api/v1/datasets/woods/results/{score_job['id']}").json()["rows"]
    assert len(rows) == len(corpus)
    assert all(0.0 <= r["score"] <= 5.0 for r in rows)


def test_scoring_determinism(tmp_path, learnable_small):
    corpus, _ = learnable_small
    client, service = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "twice", "score_max": 5})
    train = client.post(
        "/api/v1/datasets/twice/train",
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    assert wait_for(client, train.json()["id"])["state"] == "done"

    test_bytes = corpus_csv_bytes(corpus, include_scores=False)
    job_ids = []
    for _ in range(2):
        r = client.post(
            "/api/v1/datasets/twice/score",
            files={"file": ("t.csv", io.BytesIO(test_bytes), "text/csv")},
        )
        job = wait_for(client, r.json()["id"])
        assert job["state"] == "done"
        job_ids.append(job["id"])
    csv_a = service.result_path("twice", job_ids[0]).read_bytes()
    csv_b = service.result_path("twice", job_ids[1]).read_bytes()
    assert csv_a == csv_b


def test_crash_during_checkpoint_write_preserves_model(tmp_path, learnable_small, monkeypatch):
    corpus, _ = learnable_small
    client, service = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "safe", "score_max": 5})
    train = client.post(
        "/api/v1/datasets/safe/train",
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    assert wait_for(client, train.json()["id"])["state"] == "done"
    ckpt_path = tmp_path / "data" / "safe" / "model.ckpt"
    before = ckpt_path.read_bytes()

    # simulate a kill mid-write: the tmp file gets half the payload, then the
    # process dies before the atomic swap
    import asag.service as service_module

    real_save = service_module.save_checkpoint

    def dying_save(model, path, metadata=None):
        from pathlib import Path

        Path(path).write_text('{"format": "asag-head-ckpt v1", "truncat', "utf-8")
        raise RuntimeError("killed mid-write")

    monkeypatch.setattr(service_module, "save_checkpoint", dying_save)
    retrain = client.post(
        "/api/v1/datasets/safe/train",
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    job = wait_for(client, retrain.json()["id"])
    assert job["state"] == "failed"
    monkeypatch.setattr(service_module, "save_checkpoint", real_save)

    # previous checkpoint is untouched and still scores
    assert ckpt_path.read_bytes() == before
    score = client.post(
        "/api/v1/datasets/safe/score",
        files={"file": ("t.csv", io.BytesIO(corpus_csv_bytes(corpus, include_scores=False)), "text/csv")},
    )
    score_job = wait_for(client, score.json()["id"])
    assert score_job["state"] == "done", score_job["error"]

    # a crash exactly at the swap point also leaves the old file intact
    def dying_swap(tmp, final):
        if final.name == "model.ckpt":
            raise RuntimeError("killed at swap")
        import os

        os.replace(tmp, final)

    monkeypatch.setattr(service_module, "_atomic_replace", dying_swap)
    retrain = client.post(
        "/api/v1/datasets/safe/train",
        files={"file": ("train.csv", io.BytesIO(corpus_csv_bytes(corpus)), "text/csv")},
    )
    job = wait_for(client, retrain.json()["id"])
    assert job["state"] == "failed"
    assert ckpt_path.read_bytes() == before


def test_pivot_totals_over_540_rows(tmp_path):
    from asag.corpus import AnswerPair, Corpus, write_scored_csv

    client, service = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "big", "score_max": 5})
    pairs = tuple(
        AnswerPair(id=f"r{i}", question_id=f"q{i % 54}", question_text="",
                   reference_answer="ref", student_answer=f"answer {i}")
        for i in range(540)
    )
    corpus = Corpus(pairs=pairs, score_max=5.0)
    result_path = service.result_path("big", "job540")
    result_path.parent.mkdir(parents=True, exist_ok=True)
    write_scored_csv(corpus, [float(i % 6) * 0.8 for i in range(540)], result_path)

    pivot = client.get(
        "/api/v1/datasets/big/pivot", params={"job": "job540", "by": "question_id", "agg": "count"}
    ).json()
    assert pivot["totals"]["count"] == 540
    assert pivot["totals"]["value"] == 540
    assert len(pivot["groups"]) == 54


def test_pivot_empty_results(tmp_path):
    client, service = make_client(tmp_path)
    client.post("/api/v1/datasets", json={"name": "none", "score_max": 5})
    result_path = service.result_path("none", "empty")
    result_path.parent.mkdir(parents=True, exist_ok=True)
    result_path.write_text(
        "id,question_id,question_text,reference_answer,student_answer,score\n", "utf-8"
    )
    response = client.get(
        "/api/v1/datasets/none/pivot", params={"job": "empty", "by": "question_id", "agg": "mean"}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["groups"] == []
    assert body["totals"]["count"] == 0


def test_job_state_monotonicity(tmp_path):
    from asag.errors import AsagError
    from asag.service import Job

    job = Job(id="j", kind="train", dataset="d")
    job.advance("running")
    job.advance("done")
    with pytest.raises(AsagError):
        job.advance("running")


def test_load_service_config_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("ASAG_DATA_DIR", str(tmp_path / "env"))
    monkeypatch.setenv("ASAG_PROVIDER", "hash:16")
    config = load_service_config()
    assert config.data_dir == tmp_path / "env"
    assert config.provider_spec == "hash:16"

    cfg_file = tmp_path / "service.json"
    cfg_file.write_text(json.dumps({"data_dir": str(tmp_path / "file"), "train": {"max_epochs": 3}}))
    config = load_service_config(config_path=cfg_file)
    assert config.data_dir == tmp_path / "file"  # file beats env
    assert config.provider_spec == "hash:16"  # env fills the gap
    assert config.train_overrides == {"max_epochs": 3}

    config = load_service_config(config_path=cfg_file, data_dir=str(tmp_path / "flag"))
    assert config.data_dir == tmp_path / "flag"  # flag beats file
