"""Model database: ingestion, persistence, and ranked queries.

A database holds one preprocessed silhouette and two filtered descriptors
per model (the silhouette as given and its horizontal mirror, both run
through the identical pipeline). All descriptors share a single smoothing
schedule, fixed at build time as the shortest ladder on which every
ingested silhouette becomes convex. Queries describe the target once on
that schedule and rank every model by the cheaper of its two descriptor
orientations.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .contour import Silhouette, mirror_mask, resample, trace_boundary
from .errors import DatabaseFormatError, EmptyDatabaseError
from .matching import MatchParams, MatchResult, match_cost
from .morphology import PreprocessParams, load_mask, preprocess
from .scalespace import (
    CCSSImage,
    ScaleSchedule,
    build_ccss,
    build_ccss_until_convex,
    ccss_from_dict,
    ccss_to_dict,
    extend_ccss,
    make_schedule,
    threshold_shallow,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class DatabaseParams:
    n_samples: int = 512
    tau: float = 0.005
    se_radius: int = 2
    max_rows: int = 384


@dataclass
class ModelRecord:
    id: str
    display_name: str
    class_name: str
    source_path: str
    silhouette: Silhouette
    descriptor: CCSSImage
    descriptor_mirrored: CCSSImage


def extract_silhouette(mask: np.ndarray, params: DatabaseParams) -> Silhouette:
    """Cleanup, boundary trace, and arc-length normalization of one mask."""
    clean = preprocess(mask, PreprocessParams(params.se_radius, params.se_radius))
    return resample(trace_boundary(clean), params.n_samples)


def _both_silhouettes(mask: np.ndarray, params: DatabaseParams) -> tuple[Silhouette, Silhouette]:
    """Silhouettes of a mask and its horizontal mirror; the cleanup runs
    once because every kernel is reflection-symmetric."""
    clean = preprocess(mask, PreprocessParams(params.se_radius, params.se_radius))
    direct = resample(trace_boundary(clean), params.n_samples)
    flipped = resample(trace_boundary(mirror_mask(clean)), params.n_samples)
    return direct, flipped


def _prepare_source(job):
    """Silhouettes and adaptive descriptor rows for one source tuple;
    module-level so worker processes can receive it."""
    (mid, name, cls_name, mask, path), params = job
    try:
        sil, sil_m = _both_silhouettes(mask, params)
        img = build_ccss_until_convex(sil, params.max_rows)
        img_m = build_ccss_until_convex(sil_m, params.max_rows)
        return "ok", (mid, name, cls_name, path, sil, sil_m, img, img_m)
    except Exception as exc:
        return "err", (mid, f"{type(exc).__name__}: {exc}")


@dataclass
class ModelDatabase:
    params: DatabaseParams
    schedule: ScaleSchedule
    records: dict[str, ModelRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    @classmethod
    def build(cls, sources: list[tuple[str, str, str, np.ndarray, str]],
              params: DatabaseParams | None = None,
              workers: int | None = None) -> "ModelDatabase":
        """Two-pass build from (id, display_name, class_name, mask, path)
        tuples. Pass one builds each model's rows up to its convexity
        scale; pass two extends everything to the longest ladder found, so
        all descriptors share one schedule with every silhouette convex at
        the last row. Failing masks are logged and skipped.

        workers > 1 fans the per-model preparation out over processes;
        preparation is pure and order-preserving, so the result is
        identical to a sequential build.
        """
        params = params or DatabaseParams()
        jobs = [(src, params) for src in sources]
        if workers and workers > 1:
            import multiprocessing

            with multiprocessing.get_context("fork").Pool(workers) as pool:
                outcomes = pool.map(_prepare_source, jobs)
        else:
            outcomes = [_prepare_source(j) for j in jobs]

        prepared = []
        needed = 1
        for status, payload in outcomes:
            if status != "ok":
                mid, msg = payload
                log.warning("skipping model %r: %s", mid, msg)
                continue
            prepared.append(payload)
            needed = max(needed, len(payload[6].sigmas), len(payload[7].sigmas))

        schedule = make_schedule(needed, params.n_samples)
        db = cls(params=params, schedule=schedule)
        for mid, name, cls_name, path, sil, sil_m, img, img_m in prepared:
            db.records[mid] = ModelRecord(
                id=mid,
                display_name=name,
                class_name=cls_name,
                source_path=path,
                silhouette=sil,
                descriptor=threshold_shallow(extend_ccss(img, sil, schedule), params.tau),
                descriptor_mirrored=threshold_shallow(
                    extend_ccss(img_m, sil_m, schedule), params.tau
                ),
            )
        return db

    def ingest(self, mask: np.ndarray, mid: str, display_name: str = "",
               class_name: str = "", source_path: str = "") -> ModelRecord:
        """Add one model on the database's existing schedule."""
        if mid in self.records:
            raise ValueError(f"duplicate model id {mid!r}")
        sil, sil_m = _both_silhouettes(mask, self.params)
        rec = ModelRecord(
            id=mid,
            display_name=display_name or mid,
            class_name=class_name,
            source_path=source_path,
            silhouette=sil,
            descriptor=threshold_shallow(build_ccss(sil, self.schedule), self.params.tau),
            descriptor_mirrored=threshold_shallow(build_ccss(sil_m, self.schedule), self.params.tau),
        )
        self.records[mid] = rec
        return rec

    def describe_target(self, mask: np.ndarray, tau: float | None = None) -> CCSSImage:
        """Target descriptor on the database schedule, filtered like the
        stored models unless a tau override is given."""
        sil = extract_silhouette(mask, self.params)
        tau = self.params.tau if tau is None else tau
        return threshold_shallow(build_ccss(sil, self.schedule), tau)

    def query(self, mask: np.ndarray, match_params: MatchParams | None = None,
              tau: float | None = None) -> list[MatchResult]:
        """Rank every model by matching cost against the target mask.

        Each model is scored through both stored orientations and keeps
        the cheaper one. Results are sorted by cost, ties by id, so the
        ranking is independent of evaluation order.
        """
        if not self.records:
            raise EmptyDatabaseError("database has no models")
        match_params = match_params or MatchParams()
        target = self.describe_target(mask, tau)
        return self.rank(target, match_params, tau)

    def rank(self, target: CCSSImage, match_params: MatchParams | None = None,
             tau: float | None = None) -> list[MatchResult]:
        """Rank a pre-built target descriptor against every model."""
        if not self.records:
            raise EmptyDatabaseError("database has no models")
        match_params = match_params or MatchParams()
        results = []
        for rec in self.records.values():
            desc = rec.descriptor
            desc_m = rec.descriptor_mirrored
            if tau is not None and tau > self.params.tau:
                desc = threshold_shallow(desc, tau)
                desc_m = threshold_shallow(desc_m, tau)
            direct = match_cost(target, desc, match_params, rec.id)
            if direct.total_cost == 0.0:
                results.append(direct)  # costs are non-negative
                continue
            flipped = match_cost(target, desc_m, match_params, rec.id)
            if flipped.total_cost < direct.total_cost:
                flipped.mirrored = True
                results.append(flipped)
            else:
                results.append(direct)
        results.sort(key=lambda r: (r.total_cost, r.model_id))
        return results


def _silhouette_to_dict(sil: Silhouette) -> dict:
    return {
        "points": [[float(x), float(y)] for x, y in sil.points],
        "bow_index": sil.bow_index,
        "stern_index": sil.stern_index,
        "deck_span": [float(sil.deck_span[0]), float(sil.deck_span[1])],
    }


def _silhouette_from_dict(doc: dict) -> Silhouette:
    return Silhouette(
        points=np.array(doc["points"], dtype=float),
        bow_index=int(doc["bow_index"]),
        stern_index=int(doc["stern_index"]),
        deck_span=(float(doc["deck_span"][0]), float(doc["deck_span"][1])),
    )


def save(db: ModelDatabase, db_dir: str) -> None:
    """Write index.json plus one document per model under models/."""
    os.makedirs(os.path.join(db_dir, "models"), exist_ok=True)
    index = {
        "format_version": FORMAT_VERSION,
        "params": asdict(db.params),
        "sigmas": list(db.schedule.sigmas),
        "models": [
            {
                "id": rec.id,
                "display_name": rec.display_name,
                "class_name": rec.class_name,
                "source_path": rec.source_path,
                "file": f"models/{rec.id}.json",
            }
            for rec in db.records.values()
        ],
    }
    with open(os.path.join(db_dir, "index.json"), "w") as fh:
        json.dump(index, fh, indent=1)
    for rec in db.records.values():
        doc = {
            "format_version": FORMAT_VERSION,
            "id": rec.id,
            "silhouette": _silhouette_to_dict(rec.silhouette),
            "descriptor": ccss_to_dict(rec.descriptor),
            "descriptor_mirrored": ccss_to_dict(rec.descriptor_mirrored),
        }
        with open(os.path.join(db_dir, "models", f"{rec.id}.json"), "w") as fh:
            json.dump(doc, fh)


def load(db_dir: str) -> ModelDatabase:
    """Read a saved database; any structural problem aborts the load."""
    index_path = os.path.join(db_dir, "index.json")
    try:
        with open(index_path) as fh:
            index = json.load(fh)
    except FileNotFoundError:
        raise DatabaseFormatError(f"no database index at {index_path}")
    except json.JSONDecodeError as exc:
        raise DatabaseFormatError(f"corrupt database index: {exc}")

    if index.get("format_version") != FORMAT_VERSION:
        raise DatabaseFormatError(
            f"unsupported database format version {index.get('format_version')!r}"
        )

    try:
        params = DatabaseParams(**index["params"])
        schedule = ScaleSchedule(tuple(float(s) for s in index["sigmas"]))
        db = ModelDatabase(params=params, schedule=schedule)
        for entry in index["models"]:
            with open(os.path.join(db_dir, entry["file"])) as fh:
                doc = json.load(fh)
            if doc.get("format_version") != FORMAT_VERSION:
                raise DatabaseFormatError(
                    f"model {entry['id']!r} has unsupported format version"
                )
            db.records[entry["id"]] = ModelRecord(
                id=entry["id"],
                display_name=entry["display_name"],
                class_name=entry["class_name"],
                source_path=entry["source_path"],
                silhouette=_silhouette_from_dict(doc["silhouette"]),
                descriptor=ccss_from_dict(doc["descriptor"]),
                descriptor_mirrored=ccss_from_dict(doc["descriptor_mirrored"]),
            )
    except DatabaseFormatError:
        raise
    except (KeyError, ValueError, TypeError, json.JSONDecodeError, OSError) as exc:
        raise DatabaseFormatError(f"corrupt database: {exc}")
    return db


def build_from_directory(masks_dir: str, params: DatabaseParams | None = None) -> ModelDatabase:
    """Build from a directory of mask files described by manifest.json
    ([{id, file, display_name?, class_name?}, ...]). Unreadable masks are
    skipped with a warning."""
    manifest_path = os.path.join(masks_dir, "manifest.json")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise DatabaseFormatError(f"no manifest.json in {masks_dir}")
    except json.JSONDecodeError as exc:
        raise DatabaseFormatError(f"corrupt manifest: {exc}")

    sources = []
    for entry in manifest:
        path = os.path.join(masks_dir, entry["file"])
        try:
            mask = load_mask(path)
        except Exception as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        sources.append(
            (
                entry["id"],
                entry.get("display_name", entry["id"]),
                entry.get("class_name", ""),
                mask,
                entry["file"],
            )
        )
    return ModelDatabase.build(sources, params)
