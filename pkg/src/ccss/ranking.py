"""Canonical machine-readable form of a ranked query result.

Both the command line and the query service emit exactly this document
(same key order, same separators), so the two transports return
byte-identical JSON for identical inputs and parameters. The query is
identified by the SHA-256 of the uploaded mask file, which doubles as the
query id referenced by operator decisions.
"""
from __future__ import annotations

import hashlib
import json

from .database import ModelDatabase
from .matching import MatchParams, MatchResult

DOCUMENT_VERSION = 1


def mask_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def ranking_document(
    db: ModelDatabase,
    results: list[MatchResult],
    query_sha256: str,
    params: MatchParams,
    tau: float,
    top_k: int | None = None,
) -> str:
    """Serialize a ranked result list canonically (deterministic bytes)."""
    shown = results if top_k is None else results[:top_k]
    doc = {
        "version": DOCUMENT_VERSION,
        "query_sha256": query_sha256,
        "params": {
            "alpha": params.alpha,
            "sigma_gain": params.sigma_gain,
            "penalty_unit": params.penalty_unit,
            "tau": tau,
            "top_k": top_k,
        },
        "total_models": len(results),
        "entries": [
            {
                "rank": i,
                "id": r.model_id,
                "display_name": db.records[r.model_id].display_name,
                "class_name": db.records[r.model_id].class_name,
                "cost": r.total_cost,
                "mirrored": r.mirrored,
                "shift": r.shift_applied,
            }
            for i, r in enumerate(shown, 1)
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
