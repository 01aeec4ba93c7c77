"""HTTP query service wrapping a loaded model database.

The database loads in a background thread at startup; every endpoint
returns 503 until it is ready. The database is immutable once loaded, so
concurrent queries are safe; operator decisions go through a single
append-only JSONL log guarded by a lock, deduplicated by idempotency key.
"""
from __future__ import annotations

import contextlib
import datetime
import io
import json
import os
import tempfile
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image, UnidentifiedImageError

from .. import database as dbmod
from ..errors import CCSSError
from ..matching import MatchParams
from ..ranking import mask_digest, ranking_document
from ..render import render_ccss
from .schemas import (
    DecisionRequest,
    DecisionResponse,
    HealthResponse,
    ModelInfo,
    QueryResponseDoc,
)


class _DecisionLog:
    """Append-only JSONL decision log; never truncated on restart."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._keys: set[str] = set()
        if os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    try:
                        key = json.loads(line).get("idempotency_key")
                    except json.JSONDecodeError:
                        continue
                    if key:
                        self._keys.add(key)

    def append(self, entry: dict) -> bool:
        """Write one entry; returns False for a duplicate idempotency key."""
        key = entry.get("idempotency_key") or ""
        with self._lock:
            if key and key in self._keys:
                return False
            with open(self.path, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            if key:
                self._keys.add(key)
        return True


def _decode_mask(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as img:
            gray = img.convert("L")
            arr = np.asarray(gray)
    except UnidentifiedImageError:
        raise HTTPException(status_code=400, detail="unreadable mask image")
    return arr >= 128


def create_app(
    db_dir: str | None = None,
    db: dbmod.ModelDatabase | None = None,
    decision_log_path: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the service around a database directory (loaded in the
    background at startup) or an already-loaded database. static_dir, if
    given, is served at / (the built operator console)."""
    state = {"db": db, "error": None}

    def _load() -> None:
        try:
            state["db"] = dbmod.load(db_dir)
        except Exception as exc:
            state["error"] = str(exc)

    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        if state["db"] is None and db_dir is not None:
            threading.Thread(target=_load, daemon=True).start()
        yield

    app = FastAPI(title="silhouette identification service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    if decision_log_path is None:
        base = db_dir if db_dir else tempfile.gettempdir()
        decision_log_path = os.path.join(base, "decisions.log")
    decisions = _DecisionLog(decision_log_path)

    def _require_db() -> dbmod.ModelDatabase:
        loaded = state["db"]
        if loaded is None:
            detail = state["error"] or "database is still loading"
            raise HTTPException(status_code=503, detail=detail)
        return loaded

    @app.get("/api/health", response_model=HealthResponse)
    def health(response: Response):
        loaded = state["db"]
        if loaded is None:
            response.status_code = 503
            return HealthResponse(status=state["error"] or "loading")
        return HealthResponse(
            status="ok", models=len(loaded), schedule_rows=len(loaded.schedule)
        )

    @app.post("/api/query", response_model=QueryResponseDoc)
    async def query(
        mask: UploadFile,
        alpha: float = 0.2,
        sigma_gain: float = 14.0,
        tau: float | None = None,
        top_k: int = 6,
    ):
        loaded = _require_db()
        data = await mask.read()
        if not data:
            raise HTTPException(status_code=400, detail="empty upload")
        arr = _decode_mask(data)
        try:
            params = MatchParams(alpha=alpha, sigma_gain=sigma_gain)
            results = loaded.query(arr, params, tau)
        except (CCSSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        effective_tau = tau if tau is not None else loaded.params.tau
        doc = ranking_document(
            loaded, results, mask_digest(data), params, effective_tau, top_k
        )
        return Response(content=doc, media_type="application/json")

    @app.get("/api/models/{model_id}", response_model=ModelInfo)
    def model_info(model_id: str):
        loaded = _require_db()
        rec = loaded.records.get(model_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        return ModelInfo(
            id=rec.id,
            display_name=rec.display_name,
            class_name=rec.class_name,
            silhouette=[[float(x), float(y)] for x, y in rec.silhouette.points],
            deck_span=[rec.silhouette.deck_span[0], rec.silhouette.deck_span[1]],
            bow_index=rec.silhouette.bow_index,
            stern_index=rec.silhouette.stern_index,
        )

    @app.get("/api/models/{model_id}/render")
    def model_render(model_id: str):
        loaded = _require_db()
        rec = loaded.records.get(model_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        with tempfile.NamedTemporaryFile(suffix=".png") as tmp:
            render_ccss(rec.descriptor, tmp.name, title=rec.display_name)
            tmp.seek(0)
            png = tmp.read()
        return Response(content=png, media_type="image/png")

    @app.post("/api/decisions", response_model=DecisionResponse)
    def record_decision(decision: DecisionRequest):
        loaded = _require_db()
        if decision.model_id not in loaded.records:
            raise HTTPException(status_code=404, detail=f"unknown model {decision.model_id!r}")
        entry = {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "query_sha256": decision.query_sha256,
            "model_id": decision.model_id,
            "note": decision.note,
            "idempotency_key": decision.idempotency_key,
        }
        logged = decisions.append(entry)
        return DecisionResponse(logged=logged, duplicate=not logged)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
