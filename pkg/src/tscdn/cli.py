"""tscdn command line: ingest, merge, index, query, stats, export-json,
verify, serve."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diag import Diagnostics
from .index import EmptyQueryError, InvalidIntervalError, QuerySpec
from .index import query as run_query
from .ingest import IngestError
from .pipeline import build_snapshot_index, ingest_export, load_snapshot, merge_cdn
from .server import search_response_json
from .store import CdnStore, StoreError
from .corpus import export_json_db, load_corpus_dir
from .timeutil import DEFAULT_OFFSET, iso_z, parse_iso_utc


def _add_ingest(sub):
    p = sub.add_parser("ingest", help="parse an export directory into a CDN")
    p.add_argument("export_dir", type=Path)
    p.add_argument("--channel", required=True, help="ASCII channel slug")
    p.add_argument("--channel-name", default=None)
    p.add_argument("--out", required=True, type=Path, help="CDN directory")
    p.add_argument("--crawl-time", default=None,
                   help="ISO-8601 crawl instant (defaults to now)")
    p.add_argument("--archive-id", default=None)
    p.add_argument("--offset", default=DEFAULT_OFFSET,
                   help="fixed UTC offset of export wall-clock times")
    p.add_argument("--cdn-prefix", default="/cdn")


def _add_query(sub):
    p = sub.add_parser("query", help="keyword + time-interval search")
    p.add_argument("phrase")
    p.add_argument("--cdn", required=True, type=Path)
    p.add_argument("--from", dest="t_from", default=None)
    p.add_argument("--to", dest="t_to", default=None)
    p.add_argument("--channels", default=None, help="comma-separated slugs")
    p.add_argument("--all-terms", action="store_true")
    p.add_argument("--coalesced", action="store_true")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscdn",
                                     description="archival CDN + time-travel search")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_ingest(sub)

    p = sub.add_parser("merge", help="merge CDNs into a master CDN")
    p.add_argument("master", type=Path)
    p.add_argument("others", nargs="+", type=Path)

    p = sub.add_parser("index", help="build cdn/index.json from the JSON DB")
    p.add_argument("cdn", type=Path)
    p.add_argument("--coalesce", action="store_true")
    p.add_argument("--tau", type=float, default=0.05)

    _add_query(sub)

    p = sub.add_parser("stats", help="before/after dedup statistics")
    p.add_argument("cdn", type=Path)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export-json", help="write the per-channel JSON DB")
    p.add_argument("cdn", type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("verify", help="re-hash every stored object")
    p.add_argument("cdn", type=Path)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("cdn", type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", type=Path, default=None, help="built explorer dist dir")
    p.add_argument("--offset", default=DEFAULT_OFFSET)

    return parser


def cmd_ingest(args) -> int:
    diag = Diagnostics(stream=sys.stderr)
    crawl_time = parse_iso_utc(args.crawl_time) if args.crawl_time else None
    report = ingest_export(args.export_dir, args.channel, args.out,
                           channel_name=args.channel_name, crawl_time=crawl_time,
                           archive_id=args.archive_id, zone_spec=args.offset,
                           cdn_prefix=args.cdn_prefix, diag=diag)
    print(f"archive {report.archive_id}: {report.documents} documents, "
          f"{report.messages} messages ({report.messages_used} used), "
          f"{report.files_ingested} files stored, {report.files_missing} missing, "
          f"{report.warnings} warnings")
    return 0


def cmd_merge(args) -> int:
    master, reports = merge_cdn(args.master, args.others)
    added = sum(r.objects_added for r in reports)
    deduped = sum(r.objects_deduplicated for r in reports)
    saved = sum(r.bytes_saved for r in reports)
    print(f"merged {len(reports)} archives into {master.root}: "
          f"{added} objects added, {deduped} deduplicated, {saved} bytes saved")
    return 0


def cmd_index(args) -> int:
    out = build_snapshot_index(args.cdn, coalesce=args.coalesce, tau=args.tau)
    print(f"wrote {out}")
    return 0


def cmd_query(args) -> int:
    snapshot = load_snapshot(args.cdn)
    spec = QuerySpec(
        keywords=[args.phrase],
        interval=(parse_iso_utc(args.t_from) if args.t_from else None,
                  parse_iso_utc(args.t_to, end_of_day=True) if args.t_to else None),
        channels=args.channels.split(",") if args.channels else None,
        limit=args.limit,
        coalesced=args.coalesced,
        all_terms=args.all_terms,
    )
    try:
        results = run_query(snapshot.index, spec)
    except (EmptyQueryError, InvalidIntervalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(search_response_json(results, snapshot))
        return 0
    for r in results:
        text = snapshot.corpus.latest(r.event).text
        snippet = text if len(text) <= 80 else text[:77] + "..."
        print(f"{iso_z(r.timestamp)}  {r.event.channel_slug}/{r.event.local_id}  "
              f"cos={r.cosine:.4f}  tfief={r.tf_ief_sum:.4f}  {snippet}")
    print(f"{len(results)} result(s)")
    return 0


def cmd_stats(args) -> int:
    store = CdnStore(args.cdn)
    stats = store.stats()
    if args.json:
        print(json.dumps({"global": stats.as_dict(),
                          "archives": {a: store.stats(a).as_dict()
                                       for a in sorted(store.dictionaries)}},
                         ensure_ascii=False, indent=2, sort_keys=True))
        return 0
    print(f"{'class':<8} {'items before':>12} {'items after':>12} "
          f"{'bytes before':>14} {'bytes after':>14} {'decrease':>9}")
    for name, cs in stats.as_dict().items():
        print(f"{name:<8} {cs['items_before']:>12} {cs['items_after']:>12} "
              f"{cs['bytes_before']:>14} {cs['bytes_after']:>14} "
              f"{cs['decrease_pct']:>8.1f}%")
    return 0


def cmd_export_json(args) -> int:
    store = CdnStore(args.cdn)
    corpus = load_corpus_dir(store.db_dir)
    written = export_json_db(corpus, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    report = CdnStore(args.cdn).verify()
    if report.ok:
        print(f"ok: {report.checked} objects verified")
        return 0
    for m in report.mismatches:
        print(json.dumps(m, ensure_ascii=False), file=sys.stderr)
    print(f"FAILED: {len(report.mismatches)} of {report.checked} objects bad",
          file=sys.stderr)
    return 1


def cmd_serve(args) -> int:
    from .server import serve
    try:
        snapshot = load_snapshot(args.cdn, zone_spec=args.offset, require_index=True)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    serve(snapshot, host=args.host, port=args.port, ui_dir=args.ui)
    return 0


HANDLERS = {
    "ingest": cmd_ingest,
    "merge": cmd_merge,
    "index": cmd_index,
    "query": cmd_query,
    "stats": cmd_stats,
    "export-json": cmd_export_json,
    "verify": cmd_verify,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (IngestError, StoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
