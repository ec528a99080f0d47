"""HTTP grading service realizing the professor workflow.

Register a dataset, upload a training CSV to fit a model (asynchronous
job with a live learning curve), upload test CSVs to score, download
the scored CSV, and query pivot aggregations. Everything persists under
a data directory::

    <data_dir>/<dataset>/
        meta.json
        train.csv
        model.ckpt
        runs/<job>/curve.ndjson
        results/<job>.csv

Checkpoints are replaced only by atomic rename, so an interrupted
training job never corrupts the model a professor is already scoring
with. One train job per dataset at a time; scoring runs concurrently.
"""

from __future__ import annotations

import json
import math
import os
import re
import threading
import uuid
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from .corpus import Corpus, read_pairs_csv, write_scored_csv
from .embed import provider_from_spec
from .errors import AsagError, CsvFormatError, UndefinedMetricError
from .evalmetrics import pearson, rmse
from .features import FEATURE_SETS, feature_matrix, scaled_targets
from .forest import ForestConfig, forest_fit, forest_predict, load_forest, save_forest
from .model import (
    HeadConfig,
    checkpoint_timestamp,
    load_checkpoint,
    predict_score,
    save_checkpoint,
)
from .splitter import SplitSpec, stratified_split
from .trainer import TrainConfig, fit_with_controller

__all__ = ["ServiceConfig", "load_service_config", "create_app"]

_NAME_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

API_PREFIX = "/api/v1"


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    bind: str = "127.0.0.1:8000"
    provider_spec: str = "hash:256"
    train_overrides: dict = field(default_factory=dict)
    head_overrides: dict = field(default_factory=dict)
    split_fractions: tuple[float, ...] = (0.9, 0.1)
    forest_feature_set: str = "vecsim"
    forest_trees: int = 100


def load_service_config(
    config_path: str | Path | None = None,
    data_dir: str | None = None,
    bind: str | None = None,
    provider: str | None = None,
) -> ServiceConfig:
    """Flags win over the config file; the config file wins over env vars."""
    layered: dict[str, Any] = {
        "data_dir": os.environ.get("ASAG_DATA_DIR"),
        "bind": os.environ.get("ASAG_BIND"),
        "provider": os.environ.get("ASAG_PROVIDER"),
    }
    file_cfg: dict[str, Any] = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise AsagError(f"missing config file: {path}")
        file_cfg = json.loads(path.read_text("utf-8"))
        for key in ("data_dir", "bind", "provider"):
            if file_cfg.get(key) is not None:
                layered[key] = file_cfg[key]
    for key, value in (("data_dir", data_dir), ("bind", bind), ("provider", provider)):
        if value is not None:
            layered[key] = value
    if not layered["data_dir"]:
        raise AsagError("no data directory configured (flag, config file, or ASAG_DATA_DIR)")
    return ServiceConfig(
        data_dir=Path(layered["data_dir"]),
        bind=layered["bind"] or "127.0.0.1:8000",
        provider_spec=layered["provider"] or "hash:256",
        train_overrides=dict(file_cfg.get("train", {})),
        head_overrides=dict(file_cfg.get("head", {})),
        split_fractions=tuple(file_cfg.get("split_fractions", (0.9, 0.1))),
        forest_feature_set=file_cfg.get("forest_feature_set", "vecsim"),
        forest_trees=int(file_cfg.get("forest_trees", 100)),
    )


def _atomic_replace(tmp_path: Path, final_path: Path) -> None:
    """The checkpoint/metadata swap point; a crash before this call leaves
    the previous file untouched."""
    os.replace(tmp_path, final_path)


def _write_json_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + f".tmp-{uuid.uuid4().hex[:8]}")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True), "utf-8")
    _atomic_replace(tmp, path)


def _clean_float(value: float) -> float | None:
    return None if isinstance(value, float) and math.isnan(value) else value


@dataclass
class Job:
    id: str
    kind: str  # train | score
    dataset: str
    state: str = "queued"  # queued -> running -> done | failed
    progress: dict = field(default_factory=dict)
    error: str | None = None
    result: dict = field(default_factory=dict)

    _ORDER = ("queued", "running", "done", "failed")

    def advance(self, state: str) -> None:
        if self._ORDER.index(state) < self._ORDER.index(self.state):
            raise AsagError(f"job {self.id}: illegal transition {self.state} -> {state}")
        self.state = state

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "dataset": self.dataset,
            "state": self.state,
            "progress": self.progress,
            "error": self.error,
            "result": self.result,
        }


class GradingService:
    """Datasets on disk plus the in-memory job registry."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.provider = provider_from_spec(config.provider_spec)
        self.jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._training: set[str] = set()
        self.train_config = self._build_train_config()

    def _build_train_config(self) -> TrainConfig:
        overrides = dict(self.config.train_overrides)
        valid = {f.name for f in fields(TrainConfig)}
        unknown = set(overrides) - valid
        if unknown:
            raise AsagError(f"unknown train config keys: {sorted(unknown)}")
        return replace(TrainConfig(), **overrides)

    def _head_config(self) -> HeadConfig:
        overrides = dict(self.config.head_overrides)
        if "hidden_dims" in overrides:
            overrides["hidden_dims"] = tuple(overrides["hidden_dims"])
        return HeadConfig(input_dim=self.provider.dim, **overrides)

    # -- dataset persistence ------------------------------------------------

    def dataset_dir(self, name: str) -> Path:
        return self.data_dir / name

    def _meta_path(self, name: str) -> Path:
        return self.dataset_dir(name) / "meta.json"

    def dataset_exists(self, name: str) -> bool:
        return self._meta_path(name).is_file()

    def read_meta(self, name: str) -> dict:
        if not self.dataset_exists(name):
            raise HTTPException(404, f"unknown dataset {name!r}")
        return json.loads(self._meta_path(name).read_text("utf-8"))

    def write_meta(self, name: str, meta: dict) -> None:
        _write_json_atomic(self._meta_path(name), meta)

    def create_dataset(self, name: str, score_max: float) -> dict:
        if not _NAME_RE.match(name or ""):
            raise HTTPException(400, "dataset name must match [a-z0-9_-]{1,64}")
        if score_max is None or score_max <= 0:
            raise HTTPException(400, "score_max must be a positive number")
        if self.dataset_exists(name):
            raise HTTPException(409, f"dataset {name!r} already exists")
        directory = self.dataset_dir(name)
        (directory / "runs").mkdir(parents=True, exist_ok=True)
        (directory / "results").mkdir(parents=True, exist_ok=True)
        meta = {
            "name": name,
            "score_max": score_max,
            "created_at": checkpoint_timestamp(),
            "model": None,
            "runs": [],
        }
        self.write_meta(name, meta)
        return meta

    def list_datasets(self) -> list[dict]:
        names = sorted(p.name for p in self.data_dir.iterdir() if (p / "meta.json").is_file())
        return [self.read_meta(name) for name in names]

    # -- jobs -----------------------------------------------------------------

    def _new_job(self, kind: str, dataset: str) -> Job:
        job = Job(id=uuid.uuid4().hex, kind=kind, dataset=dataset)
        with self._lock:
            self.jobs[job.id] = job
        return job

    def get_job(self, job_id: str) -> Job:
        job = self.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return job

    def curve_path(self, dataset: str, job_id: str) -> Path:
        return self.dataset_dir(dataset) / "runs" / job_id / "curve.ndjson"

    def result_path(self, dataset: str, job_id: str) -> Path:
        return self.dataset_dir(dataset) / "results" / f"{job_id}.csv"

    def read_curve(self, job: Job) -> list[dict]:
        path = self.curve_path(job.dataset, job.id)
        if not path.is_file():
            return []
        points = []
        for line in path.read_text("utf-8").splitlines():
            if line.strip():
                points.append(json.loads(line))
        return points

    # -- training ----------------------------------------------------------------

    def start_train(self, name: str, csv_bytes: bytes, pipeline: str) -> Job:
        meta = self.read_meta(name)
        if pipeline not in ("head", "features-forest"):
            raise HTTPException(400, f"unknown pipeline {pipeline!r}")
        with self._lock:
            if name in self._training:
                raise HTTPException(409, f"a train job is already running on {name!r}")
            self._training.add(name)
        try:
            directory = self.dataset_dir(name)
            train_csv = directory / "train.csv"
            tmp = train_csv.with_name("train.csv.upload")
            tmp.write_bytes(csv_bytes)
            try:
                corpus = read_pairs_csv(tmp, expect_scores=True, score_max=meta["score_max"])
            except CsvFormatError as exc:
                tmp.unlink(missing_ok=True)
                raise HTTPException(422, str(exc)) from exc
            _atomic_replace(tmp, train_csv)
            job = self._new_job("train", name)
            curve_path = self.curve_path(name, job.id)
            curve_path.parent.mkdir(parents=True, exist_ok=True)
            thread = threading.Thread(
                target=self._run_train, args=(job, name, corpus, pipeline), daemon=True
            )
            thread.start()
            return job
        except Exception:
            with self._lock:
                self._training.discard(name)
            raise

    def _run_train(self, job: Job, name: str, corpus: Corpus, pipeline: str) -> None:
        try:
            job.advance("running")
            job.progress = {"epochs_done": 0, "total_epochs": self.train_config.max_epochs, "attempt": 0}
            if pipeline == "head":
                self._train_head(job, name, corpus)
            else:
                self._train_forest(job, name, corpus)
            job.advance("done")
        except AsagError as exc:
            job.error = str(exc)
            job.advance("failed")
        except Exception as exc:  # surface unexpected bugs in the job record
            job.error = f"internal error: {exc}"
            job.advance("failed")
        finally:
            with self._lock:
                self._training.discard(name)

    def _train_head(self, job: Job, name: str, corpus: Corpus) -> None:
        meta = self.read_meta(name)
        curve_path = self.curve_path(name, job.id)
        curve_file = curve_path.open("a", encoding="utf-8")

        def sink(record) -> None:
            payload = {
                "attempt": record.attempt,
                "epoch": record.epoch,
                "train_loss": record.train_loss,
                "val_loss": record.val_loss,
                "val_rmse_scaled": record.val_rmse_scaled,
                "val_pearson": _clean_float(record.val_pearson),
            }
            curve_file.write(json.dumps(payload) + "\n")
            curve_file.flush()
            job.progress = {
                "epochs_done": record.epoch,
                "total_epochs": self.train_config.max_epochs,
                "attempt": record.attempt,
            }

        try:
            spec = SplitSpec(fractions=self.config.split_fractions, seed=self.train_config.base_seed)
            report, model = fit_with_controller(
                corpus,
                self.provider,
                self._head_config(),
                self.train_config,
                spec,
                curve_sink=sink,
            )
        finally:
            curve_file.close()

        metadata = {
            "dataset": name,
            "score_max": meta["score_max"],
            "created_at": checkpoint_timestamp(),
            "seed": self.train_config.base_seed,
            "chosen_epoch": report.chosen_epoch,
            "chosen_attempt": report.chosen_attempt,
            "accepted": report.accepted,
            "pipeline": "head",
            "provider_dim": self.provider.dim,
            "job_id": job.id,
        }
        final = self.dataset_dir(name) / "model.ckpt"
        tmp = final.with_name(f"model.ckpt.tmp-{job.id[:8]}")
        save_checkpoint(model, tmp, metadata)
        _atomic_replace(tmp, final)

        summary = {
            "job_id": job.id,
            "pipeline": "head",
            "accepted": report.accepted,
            "chosen_attempt": report.chosen_attempt,
            "chosen_epoch": report.chosen_epoch,
            "val_loss": report.final_val_loss,
            "val_rmse_scaled": report.final_val_rmse_scaled,
            "val_pearson": _clean_float(report.final_val_pearson),
            "attempts": len(report.attempts),
        }
        meta["model"] = {"pipeline": "head", "job_id": job.id, "trained_at": metadata["created_at"]}
        meta["runs"].append(summary)
        self.write_meta(name, meta)
        job.result = summary

    def _train_forest(self, job: Job, name: str, corpus: Corpus) -> None:
        meta = self.read_meta(name)
        feature_set = self.config.forest_feature_set
        if feature_set not in FEATURE_SETS:
            raise AsagError(f"unknown feature set {feature_set!r}")
        spec = SplitSpec(fractions=self.config.split_fractions, seed=self.train_config.base_seed)
        train_part, val_part = stratified_split(corpus, spec)[:2]
        X = feature_matrix(train_part, feature_set, self.provider)
        y = scaled_targets(train_part)
        forest = forest_fit(X, y, ForestConfig(n_trees=self.config.forest_trees, seed=self.train_config.base_seed))

        val_X = feature_matrix(val_part, feature_set, self.provider)
        val_y = scaled_targets(val_part)
        val_pred = [forest_predict(forest, row) for row in val_X]
        val_rmse = rmse(list(val_y), val_pred)
        try:
            val_pearson = pearson(list(val_y), val_pred)
        except UndefinedMetricError:
            val_pearson = math.nan

        metadata = {
            "dataset": name,
            "score_max": meta["score_max"],
            "created_at": checkpoint_timestamp(),
            "seed": self.train_config.base_seed,
            "pipeline": "features-forest",
            "feature_set": feature_set,
            "job_id": job.id,
        }
        final = self.dataset_dir(name) / "model.ckpt"
        tmp = final.with_name(f"model.ckpt.tmp-{job.id[:8]}")
        save_forest(forest, tmp, metadata)
        _atomic_replace(tmp, final)

        summary = {
            "job_id": job.id,
            "pipeline": "features-forest",
            "feature_set": feature_set,
            "val_rmse_scaled": val_rmse,
            "val_pearson": _clean_float(val_pearson),
        }
        meta["model"] = {"pipeline": "features-forest", "job_id": job.id, "trained_at": metadata["created_at"]}
        meta["runs"].append(summary)
        self.write_meta(name, meta)
        job.result = summary

    # -- scoring -------------------------------------------------------------------

    def start_score(self, name: str, csv_bytes: bytes) -> Job:
        meta = self.read_meta(name)
        ckpt = self.dataset_dir(name) / "model.ckpt"
        if not ckpt.is_file():
            raise HTTPException(409, f"dataset {name!r} has no trained model; train first")
        tmp = self.dataset_dir(name) / f"test.csv.upload-{uuid.uuid4().hex[:8]}"
        tmp.write_bytes(csv_bytes)
        try:
            corpus = read_pairs_csv(tmp, expect_scores=False, score_max=meta["score_max"])
        except CsvFormatError as exc:
            raise HTTPException(422, str(exc)) from exc
        finally:
            tmp.unlink(missing_ok=True)
        job = self._new_job("score", name)
        thread = threading.Thread(target=self._run_score, args=(job, name, corpus), daemon=True)
        thread.start()
        return job

    def _run_score(self, job: Job, name: str, corpus: Corpus) -> None:
        try:
            job.advance("running")
            meta = self.read_meta(name)
            scores = self.score_corpus(name, corpus, meta["score_max"])
            result_path = self.result_path(name, job.id)
            result_path.parent.mkdir(parents=True, exist_ok=True)
            write_scored_csv(corpus, scores, result_path)
            job.result = {"rows": len(corpus), "csv": str(result_path)}
            job.advance("done")
        except AsagError as exc:
            job.error = str(exc)
            job.advance("failed")
        except Exception as exc:
            job.error = f"internal error: {exc}"
            job.advance("failed")

    def score_corpus(self, name: str, corpus: Corpus, score_max: float) -> list[float]:
        """Score with the dataset's checkpoint; kind is read from the file."""
        ckpt = self.dataset_dir(name) / "model.ckpt"
        head = json.loads(ckpt.read_text("utf-8"))
        kind = head.get("format", "")
        if kind.startswith("asag-head-ckpt"):
            model, _ = load_checkpoint(ckpt)
            return [
                predict_score(
                    model,
                    self.provider.embed_pair(p.reference_answer, p.student_answer),
                    score_max,
                )
                for p in corpus
            ]
        forest, metadata = load_forest(ckpt)
        feature_set = metadata.get("feature_set", self.config.forest_feature_set)
        X = feature_matrix(corpus, feature_set, self.provider)
        scores = []
        for row in X:
            unit = min(1.0, max(0.0, forest_predict(forest, row)))
            scores.append(unit * score_max)
        return scores

    # -- results and pivots -----------------------------------------------------------

    def read_result_rows(self, name: str, job_id: str) -> list[dict]:
        path = self.result_path(name, job_id)
        if not path.is_file():
            raise HTTPException(404, f"no results for job {job_id!r}")
        corpus = read_pairs_csv(path, expect_scores=True, score_max=self.read_meta(name)["score_max"])
        return [
            {
                "id": p.id,
                "question_id": p.question_id,
                "question_text": p.question_text,
                "reference_answer": p.reference_answer,
                "student_answer": p.student_answer,
                "score": p.gold_score,
            }
            for p in corpus
        ]

    def pivot(self, name: str, job_id: str, by: str, agg: str) -> dict:
        if by not in ("question_id", "reference_answer"):
            raise HTTPException(400, f"unknown pivot key {by!r}")
        if agg not in ("mean", "min", "max", "count"):
            raise HTTPException(400, f"unknown aggregation {agg!r}")
        rows = self.read_result_rows(name, job_id)
        groups: dict[str, list[float]] = {}
        for row in rows:
            groups.setdefault(row[by], []).append(row["score"])

        def aggregate(values: list[float]) -> float:
            if agg == "mean":
                return sum(values) / len(values)
            if agg == "min":
                return min(values)
            if agg == "max":
                return max(values)
            return len(values)

        all_scores = [row["score"] for row in rows]
        return {
            "by": by,
            "agg": agg,
            "groups": [
                {"key": key, "count": len(groups[key]), "value": aggregate(groups[key])}
                for key in sorted(groups)
            ],
            "totals": {"count": len(rows), "value": aggregate(all_scores) if rows else None},
        }


def create_app(config: ServiceConfig) -> FastAPI:
    service = GradingService(config)
    app = FastAPI(title="asag grading service")
    app.state.service = service

    @app.exception_handler(AsagError)
    async def _domain_error(_request: Request, exc: AsagError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post(f"{API_PREFIX}/datasets", status_code=201)
    async def create_dataset(body: dict):
        name = body.get("name")
        score_max = body.get("score_max")
        try:
            score_max = float(score_max)
        except (TypeError, ValueError):
            raise HTTPException(400, "score_max must be a positive number")
        return service.create_dataset(name, score_max)

    @app.get(f"{API_PREFIX}/datasets")
    async def list_datasets():
        return {"datasets": service.list_datasets()}

    @app.get(f"{API_PREFIX}/datasets/{{name}}")
    async def get_dataset(name: str):
        return service.read_meta(name)

    @app.post(f"{API_PREFIX}/datasets/{{name}}/train", status_code=202)
    async def train(name: str, file: UploadFile, pipeline: str = "head"):
        payload = await file.read()
        job = service.start_train(name, payload, pipeline)
        return job.to_dict()

    @app.post(f"{API_PREFIX}/datasets/{{name}}/score", status_code=202)
    async def score(name: str, file: UploadFile):
        payload = await file.read()
        job = service.start_score(name, payload)
        return job.to_dict()

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    async def get_job(job_id: str):
        job = service.get_job(job_id)
        payload = job.to_dict()
        if job.kind == "train":
            payload["curve"] = service.read_curve(job)
        return payload

    @app.get(f"{API_PREFIX}/datasets/{{name}}/results/{{job_id}}")
    async def results(name: str, job_id: str):
        return {"rows": service.read_result_rows(name, job_id)}

    @app.get(f"{API_PREFIX}/datasets/{{name}}/results/{{job_id}}/csv")
    async def results_csv(name: str, job_id: str):
        path = service.result_path(name, job_id)
        if not path.is_file():
            raise HTTPException(404, f"no results for job {job_id!r}")
        return Response(
            content=path.read_bytes(),
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="{name}-{job_id}.csv"'},
        )

    @app.get(f"{API_PREFIX}/datasets/{{name}}/pivot")
    async def pivot(name: str, job: str, by: str = "question_id", agg: str = "mean"):
        return service.pivot(name, job, by, agg)

    @app.get(f"{API_PREFIX}/health")
    async def health():
        return {"status": "ok", "provider": service.provider.kind, "dim": service.provider.dim}

    return app


def run_server(config: ServiceConfig) -> None:  # pragma: no cover - exercised manually
    import uvicorn

    host, _, port = config.bind.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8000))
