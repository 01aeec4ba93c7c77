"""Command-line entry points.

Subcommands: build a database from masks, query one ranked, render
scale-space figures, run a retrieval evaluation, generate a synthetic
corpus, and serve the HTTP API. Every empirically tuned constant is a
flag. `query` can also act as a thin client against a running service
via --server; by default it ranks in-process against a local database.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import database as dbmod
from .database import DatabaseParams, build_from_directory
from .errors import CCSSError
from .evaluation import format_table, run_eval
from .matching import MatchParams
from .morphology import load_mask, save_mask
from .ranking import mask_digest, ranking_document
from .scalespace import ScaleSchedule, build_ccss_until_convex, build_css, threshold_shallow

DEFAULT_DB_DIR_ENV = "CCSS_DB_DIR"


def _add_match_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.2,
                   help="position/concavity mixing weight (default 0.2)")
    p.add_argument("--sigma-gain", type=float, default=14.0,
                   help="unmatched-point penalty gain (default 14)")
    p.add_argument("--tau", type=float, default=None,
                   help="shallow-lobe threshold override")


def _db_dir(args) -> str:
    if args.db_dir:
        return args.db_dir
    env = os.environ.get(DEFAULT_DB_DIR_ENV)
    if env:
        return env
    raise SystemExit(f"no database directory given (flag or ${DEFAULT_DB_DIR_ENV})")


def cmd_build(args) -> int:
    params = DatabaseParams(
        n_samples=args.samples,
        tau=args.tau if args.tau is not None else 0.005,
        se_radius=args.se_radius,
        max_rows=args.max_rows,
    )
    db = build_from_directory(args.masks_dir, params)
    if len(db) == 0:
        print("no models could be ingested", file=sys.stderr)
        return 1
    dbmod.save(db, _db_dir(args))
    for rec in db.records.values():
        print(f"ingested {rec.id}  ({rec.descriptor.point_count()} points)")
    print(f"saved {len(db)} models, schedule rows: {len(db.schedule)}")
    return 0


def cmd_query(args) -> int:
    with open(args.target, "rb") as fh:
        raw = fh.read()

    if args.server:
        return _query_server(args, raw)

    db = dbmod.load(_db_dir(args))
    params = MatchParams(alpha=args.alpha, sigma_gain=args.sigma_gain)
    mask = load_mask(args.target)
    results = db.query(mask, params, args.tau)
    tau = args.tau if args.tau is not None else db.params.tau
    doc = ranking_document(db, results, mask_digest(raw), params, tau, args.top_k)
    if args.json:
        print(doc)
        return 0
    print(f"{'rank':>4}  {'cost':>12}  {'id':<16}  {'class':<12}  name")
    for i, r in enumerate(results[: args.top_k], 1):
        rec = db.records[r.model_id]
        mark = " (mirrored)" if r.mirrored else ""
        print(f"{i:>4}  {r.total_cost:>12.6f}  {r.model_id:<16}  "
              f"{rec.class_name:<12}  {rec.display_name}{mark}")
    return 0


def _query_server(args, raw: bytes) -> int:
    import urllib.request

    boundary = "ccssform"
    params = (
        f"alpha={args.alpha}&sigma_gain={args.sigma_gain}&top_k={args.top_k}"
        + (f"&tau={args.tau}" if args.tau is not None else "")
    )
    body = (
        f"--{boundary}\r\n"
        f'Content-Disposition: form-data; name="mask"; filename="target"\r\n'
        f"Content-Type: application/octet-stream\r\n\r\n"
    ).encode() + raw + f"\r\n--{boundary}--\r\n".encode()
    req = urllib.request.Request(
        f"{args.server.rstrip('/')}/api/query?{params}",
        data=body,
        headers={"Content-Type": f"multipart/form-data; boundary={boundary}"},
    )
    with urllib.request.urlopen(req) as resp:
        doc = resp.read().decode()
    if args.json:
        print(doc)
        return 0
    parsed = json.loads(doc)
    print(f"{'rank':>4}  {'cost':>12}  {'id':<16}  {'class':<12}  name")
    for e in parsed["entries"]:
        mark = " (mirrored)" if e["mirrored"] else ""
        print(f"{e['rank']:>4}  {e['cost']:>12.6f}  {e['id']:<16}  "
              f"{e['class_name']:<12}  {e['display_name']}{mark}")
    return 0


def cmd_render(args) -> int:
    from . import render as rmod

    params = DatabaseParams(n_samples=args.samples, se_radius=args.se_radius)
    mask = load_mask(args.target)
    sil = dbmod.extract_silhouette(mask, params)
    img = build_ccss_until_convex(sil, params.max_rows)
    schedule = ScaleSchedule(img.sigmas)
    if args.mode == "ccss":
        tau = args.tau if args.tau is not None else 0.0
        rmod.render_ccss(threshold_shallow(img, tau), args.out)
    elif args.mode == "css":
        rmod.render_css(build_css(sil, schedule), args.out)
    else:
        last = img.sigmas[-1]
        rmod.render_evolution(sil, (last * 0.15, last * 0.45, last), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    db = dbmod.load(_db_dir(args))
    with open(args.manifest) as fh:
        entries = json.load(fh)
    base = os.path.dirname(os.path.abspath(args.manifest))
    queries = []
    for e in entries:
        path = os.path.join(base, e["file"])
        queries.append((e.get("id", e["file"]), load_mask(path), e["truth_id"]))
    params = MatchParams(alpha=args.alpha, sigma_gain=args.sigma_gain)
    report = run_eval(db, queries, params, args.tau)
    print(format_table(report))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)
        print(f"wrote {args.json_out}")
    return 0


def cmd_synth(args) -> int:
    from .synthetic import class_name, generate_hull, query_mask, render_mask

    os.makedirs(args.out_dir, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    manifest = []
    queries = []
    for i in range(args.count):
        spec = generate_hull(args.seed + i)
        mid = f"hull-{i:04d}"
        fname = f"{mid}.png"
        save_mask(render_mask(spec), os.path.join(args.out_dir, fname))
        manifest.append({
            "id": mid,
            "file": fname,
            "display_name": f"Synthetic hull {i}",
            "class_name": class_name(spec),
        })
        if i < args.queries:
            qname = f"query-{i:04d}.png"
            save_mask(query_mask(spec, rng), os.path.join(args.out_dir, qname))
            queries.append({"id": f"q{i:04d}", "file": qname, "truth_id": mid})
    with open(os.path.join(args.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
    if queries:
        with open(os.path.join(args.out_dir, "queries.json"), "w") as fh:
            json.dump(queries, fh, indent=1)
    print(f"wrote {args.count} models and {len(queries)} queries to {args.out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(_db_dir(args), static_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccss",
        description="Silhouette identification: descriptor database, ranked "
                    "queries, figures, evaluation, and query service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a model database from a mask directory")
    p.add_argument("masks_dir")
    p.add_argument("--db-dir", default=None)
    p.add_argument("--se-radius", type=int, default=2)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--max-rows", type=int, default=384)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="rank the database against a target mask")
    p.add_argument("target")
    p.add_argument("--db-dir", default=None)
    p.add_argument("--top-k", type=int, default=6)
    p.add_argument("--json", action="store_true", help="print the canonical JSON document")
    p.add_argument("--server", default=None, help="query a running service instead")
    _add_match_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("render", help="render scale-space figures for a mask")
    p.add_argument("target")
    p.add_argument("out")
    p.add_argument("--mode", choices=("css", "ccss", "evolution"), default="ccss")
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--se-radius", type=int, default=2)
    p.add_argument("--tau", type=float, default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="run a retrieval evaluation manifest")
    p.add_argument("manifest", help="JSON list of {id, file, truth_id}")
    p.add_argument("--db-dir", default=None)
    p.add_argument("--json-out", default=None)
    _add_match_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic hull corpus")
    p.add_argument("out_dir")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--queries", type=int, default=0)
    p.add_argument("--seed", type=int, default=1000)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--db-dir", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.add_argument("--ui", default=None, help="serve a built operator console from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CCSSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
