"""HTTP labeling service.

Exposes the labeling queue, ticket content with key-phrase highlight spans,
durable label persistence, model retraining, and progress statistics as a
JSON API under /api. Single process: reads are concurrent, label writes and
model swaps serialize through one lock, retrains run off the request path.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import corpus as corpus_mod
from . import features, gbm, pipeline
from .corpus import Corpus, LabelRecord, format_timestamp
from .errors import DataError


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def keyphrase_spans(text: str) -> list[dict]:
    """Byte-offset spans of every key-phrase occurrence (case-insensitive)."""
    lowered = text.lower()
    spans = []
    for phrase in features.KEY_PHRASES:
        start = 0
        while True:
            i = lowered.find(phrase, start)
            if i < 0:
                break
            b_start = len(text[:i].encode("utf-8"))
            b_end = b_start + len(text[i : i + len(phrase)].encode("utf-8"))
            spans.append({"phrase": phrase, "start": b_start, "end": b_end})
            start = i + 1
    spans.sort(key=lambda s: (s["start"], s["end"], s["phrase"]))
    return spans


class LabelService:
    """All mutable service state behind one writer lock."""

    def __init__(
        self,
        corpus: Corpus,
        context: features.FeatureContext,
        labels_path: str | Path | None = None,
        train_config: gbm.TrainConfig | None = None,
        floor: float = 0.05,
        seed: int = 0,
        sync_retrain: bool = False,
    ):
        self.corpus = corpus
        self.context = context
        self.labels_path = Path(labels_path) if labels_path else None
        self.train_config = train_config or gbm.TrainConfig()
        self.floor = floor
        self.seed = seed
        self.sync_retrain = sync_retrain
        self.lock = threading.Lock()
        self.retrain_lock = threading.Lock()
        self.model: gbm.GbmModel | None = None
        self.model_version = 0
        self.fmatrix = features.featurize_corpus(corpus, context)
        self._row = {t: i for i, t in enumerate(self.fmatrix.ticket_ids)}

    # -- queue --------------------------------------------------------------

    def queue(self, limit: int) -> dict:
        if limit <= 0:
            raise ApiError(400, "bad_limit", "limit must be positive")
        with self.lock:
            pool = self.corpus.unlabeled_ids()
            model = self.model
            version = self.model_version
            n_labels = len(self.corpus.labels)
        if not pool:
            return {"entries": [], "model_version": version, "uniform_fallback": model is None}
        if model is None:
            probs = np.ones(len(pool))
        else:
            rows = np.array([self._row[t] for t in pool])
            probs = model.predict_proba(self.fmatrix.X[rows])
        take = min(limit, len(pool))
        batch = pipeline.sample_next_batch(
            pool, probs, take, floor=self.floor,
            seed=self.seed + version * 100003 + n_labels,
        )
        prob_of = dict(zip(pool, probs))
        now = format_timestamp(datetime.now(timezone.utc))
        entries = [
            {"ticket_id": t, "p": float(prob_of[t]), "sampled_at": now} for t in batch
        ]
        return {
            "entries": entries,
            "model_version": version,
            "uniform_fallback": model is None,
        }

    # -- tickets ------------------------------------------------------------

    def ticket(self, ticket_id: str) -> dict:
        t = self.corpus.tickets.get(ticket_id)
        if t is None:
            raise ApiError(404, "unknown_ticket", f"no such ticket: {ticket_id}")
        text = t.free_text()
        return {
            "id": t.id,
            "title": t.title,
            "description": t.description,
            "comments": [
                {"author": c.author, "posted_at": format_timestamp(c.posted_at), "text": c.text}
                for c in t.comments
            ],
            "author_email": t.author_email,
            "author_is_project_member": t.author_is_project_member,
            "priority": t.priority,
            "status": t.status,
            "issue_type": t.issue_type,
            "opened_at": format_timestamp(t.opened_at),
            "free_text": text,
            "highlights": keyphrase_spans(text),
        }

    # -- labels -------------------------------------------------------------

    def post_label(self, payload: dict) -> dict:
        ticket_id = str(payload.get("ticket_id", ""))
        try:
            label = float(payload.get("label"))
        except (TypeError, ValueError):
            raise ApiError(400, "bad_label", "label must be a number in [0,1]")
        if not 0.0 <= label <= 1.0:
            raise ApiError(400, "bad_label", f"label out of range [0,1]: {label}")
        if ticket_id not in self.corpus.tickets:
            raise ApiError(404, "unknown_ticket", f"no such ticket: {ticket_id}")
        rubric = payload.get("rubric_path") or {}
        record = LabelRecord(
            ticket_id=ticket_id,
            label=label,
            rater=str(payload.get("rater", "")),
            labeled_at=datetime.now(timezone.utc).replace(microsecond=0),
            rubric_path={k: rubric.get(k) for k in corpus_mod.RUBRIC_KEYS},
            notes=payload.get("notes"),
        )
        with self.lock:
            # journal first: the label is durable before it is acknowledged
            if self.labels_path is not None:
                corpus_mod.append_label_jsonl(record, self.labels_path)
            self.corpus.upsert_label(record)
        return {
            "ticket_id": record.ticket_id,
            "label": record.label,
            "rater": record.rater,
            "labeled_at": format_timestamp(record.labeled_at),
            "rubric_path": record.rubric_path,
            "notes": record.notes,
        }

    # -- retrain ------------------------------------------------------------

    def _retrain_inner(self) -> None:
        try:
            with self.lock:
                active = self.corpus.active_labels()
            ids = sorted(active)
            rows = np.array([self._row[t] for t in ids])
            y = np.array([active[t].label for t in ids])
            model = gbm.train(
                self.fmatrix.X[rows], y, self.train_config,
                feature_names=list(self.fmatrix.registry.names),
                registry_version=self.fmatrix.registry.version,
            )
            with self.lock:
                self.model = model
                self.model_version += 1
        finally:
            self.retrain_lock.release()

    def retrain(self) -> dict:
        with self.lock:
            n = len(self.corpus.active_labels())
        needed = 2 * self.train_config.min_data_in_leaf
        if n < needed:
            raise ApiError(409, "too_few_labels", f"need at least {needed} labels, have {n}")
        if not self.retrain_lock.acquire(blocking=False):
            raise ApiError(409, "retrain_in_progress", "a retrain is already running")
        if self.sync_retrain:
            self._retrain_inner()
            return {"status": "done", "model_version": self.model_version}
        threading.Thread(target=self._retrain_inner, daemon=True).start()
        return {"status": "started", "model_version": self.model_version}

    # -- stats --------------------------------------------------------------

    def stats(self) -> dict:
        with self.lock:
            active = self.corpus.active_labels()
            journal = list(self.corpus.labels)
            version = self.model_version
        hist = [0] * 10
        for rec in active.values():
            hist[min(int(rec.label * 10), 9)] += 1
        curve = pipeline.label_progress_curve(journal)
        return {
            "n_labels": len(active),
            "histogram": hist,
            "bin_edges": [round(i / 10, 1) for i in range(11)],
            "cumulative": [[x, y] for x, y in curve.points],
            "model_version": version,
        }


# ---------------------------------------------------------------------------
# FastAPI wiring


class LabelPost(BaseModel):
    ticket_id: str
    label: float
    rater: str = ""
    rubric_path: dict | None = None
    notes: str | None = None


def create_app(service: LabelService, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="tddetect label service")

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(DataError)
    async def handle_data_error(_request: Request, exc: DataError):
        return JSONResponse(status_code=400, content={"code": "data_error", "message": str(exc)})

    @app.get("/api/queue")
    def get_queue(limit: int = 10):
        return service.queue(limit)

    @app.get("/api/tickets/{ticket_id}")
    def get_ticket(ticket_id: str):
        return service.ticket(ticket_id)

    @app.post("/api/labels")
    def post_label(body: LabelPost):
        return service.post_label(body.model_dump())

    @app.post("/api/retrain")
    def post_retrain():
        return service.retrain()

    @app.get("/api/stats")
    def get_stats():
        return service.stats()

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="frontend")

    return app


def build_service(
    corpus_path: str | Path,
    labels_path: str | Path,
    pretrained_path: str | Path,
    seed: int = 0,
    sync_retrain: bool = False,
) -> LabelService:
    corpus, _ = corpus_mod.ingest_jsonl(corpus_path)
    labels_path = Path(labels_path)
    if labels_path.exists():
        for rec in corpus_mod.load_labels_jsonl(labels_path):
            corpus.upsert_label(rec)
    context = pipeline.build_feature_context(corpus, pretrained_path, seed=seed)
    return LabelService(
        corpus, context, labels_path=labels_path, seed=seed, sync_retrain=sync_retrain
    )


def run_server(
    corpus_path: str,
    labels_path: str,
    pretrained_path: str,
    listen: str = "127.0.0.1:8080",
    seed: int = 0,
    frontend_dir: str | None = None,
) -> None:
    import uvicorn

    service = build_service(corpus_path, labels_path, pretrained_path, seed=seed)
    app = create_app(service, frontend_dir=frontend_dir)
    host, _, port = listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
