"""End-to-end pipeline: export directory -> CDN store -> corpus -> index.

The CLI and the HTTP service are thin wrappers over these functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .corpus import (Corpus, CyberspaceSnapshot, MediaRef, export_json_db,
                     load_corpus_dir)
from .diag import Diagnostics
from .index import (CoalesceConfig, InvertedIndex, build_index, coalesce_index,
                    load_index, persist_index)
from .ingest import SourceMeta, channel_title, extract_links, parse_export, scan_export
from .linkpath import extension_of
from .scoring import (CategoryVector, CorpusTermStats, TextPipeline,
                      build_categories, build_corpus_stats, load_category_seeds)
from .store import MISSING, CdnStore, rewrite_references
from .timeutil import DEFAULT_OFFSET

PAGE_EXTENSIONS = ("html", "htm")


@dataclass
class IngestReport:
    archive_id: str
    channel_slug: str
    documents: int = 0
    messages: int = 0
    messages_used: int = 0
    files_ingested: int = 0
    files_missing: int = 0
    warnings: int = 0


def media_lookup_for(store: CdnStore):
    """(archive_id, resolved path) -> MediaRef via the store dictionary."""
    def lookup(archive_id: str, resolved_path: str) -> MediaRef | None:
        stored = store.dictionary(archive_id).get(resolved_path)
        if stored is None or stored == MISSING:
            return None
        obj = store.get_object(stored)
        if obj is None:
            return None
        return MediaRef(obj.kind, obj.hash, obj.ext, obj.size)
    return lookup


def ingest_export(export_root: Path, channel_slug: str, cdn_dir: Path, *,
                  channel_name: str | None = None,
                  crawl_time: datetime | None = None,
                  archive_id: str | None = None,
                  zone_spec: str = DEFAULT_OFFSET,
                  cdn_prefix: str = "/cdn",
                  diag: Diagnostics | None = None) -> IngestReport:
    """Run the whole fold sequence for one export directory: parse messages,
    hash and store media, rewrite references, update the JSON database."""
    diag = diag if diag is not None else Diagnostics()
    export_root = Path(export_root)
    if crawl_time is None:
        crawl_time = datetime.now(timezone.utc).replace(microsecond=0)
    source = SourceMeta(channel_name or channel_slug, channel_slug, export_root, crawl_time)
    if archive_id is None:
        archive_id = f"{channel_slug}@{crawl_time.strftime('%Y%m%dT%H%M%SZ')}"

    store = CdnStore(cdn_dir)
    report = IngestReport(archive_id, channel_slug)

    documents: list[tuple[Path, bytes]] = list(scan_export(export_root, source, diag))
    if channel_name is None:
        for _, data in documents:
            title = channel_title(data)
            if title:
                source.channel_name = title
                break

    all_messages = []
    ordinal = 0
    link_targets: list[str] = []
    seen_targets: set[str] = set()
    for path, data in documents:
        report.documents += 1
        relpath = path.relative_to(export_root).as_posix()
        messages = parse_export(data, source, doc_name=relpath,
                                ordinal_start=ordinal, assumed_zone_spec=zone_spec,
                                diag=diag)
        ordinal += len(messages)
        all_messages.extend(messages)
        for link in extract_links(data):
            if link.resolved_path not in seen_targets:
                seen_targets.add(link.resolved_path)
                link_targets.append(link.resolved_path)
    report.messages = len(all_messages)

    for target in link_targets:
        if extension_of(target) in PAGE_EXTENSIONS:
            continue   # navigation pages are rewrite targets, not objects
        file_path = export_root / target
        try:
            data = file_path.read_bytes()
        except OSError:
            store.mark_missing(archive_id, target, diag)
            report.files_missing += 1
            continue
        store.ingest_file(archive_id, target, data, diag)
        report.files_ingested += 1

    dictionary = store.dictionary(archive_id)
    for path, data in documents:
        relpath = path.relative_to(export_root).as_posix()
        rewritten = rewrite_references(data, dictionary, cdn_prefix, diag)
        out_path = store.rewritten_dir / archive_id / relpath
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(rewritten)

    corpus = load_corpus_dir(store.db_dir) if store.db_dir.is_dir() else Corpus()
    snapshot = CyberspaceSnapshot(channel_slug, crawl_time, archive_id)
    report.messages_used = corpus.add_snapshot(
        snapshot, all_messages, channel_name=source.channel_name,
        media_lookup=media_lookup_for(store), diag=diag)
    export_json_db(corpus, store.db_dir)

    store.save_index()
    report.warnings = diag.count()
    return report


def merge_cdn(master_dir: Path, other_dirs: list[Path]):
    """Merge other CDNs into the master: object union, dictionaries, corpora."""
    master = CdnStore(master_dir)
    reports = []
    corpora = [load_corpus_dir(master.db_dir)] if master.db_dir.is_dir() else []
    from .corpus import merge_corpora   # local import to keep module deps flat
    for other_dir in other_dirs:
        other = CdnStore(other_dir)
        reports.append(master.merge_from(other))
        if other.db_dir.is_dir():
            corpora.append(load_corpus_dir(other.db_dir))
    if corpora:
        export_json_db(merge_corpora(corpora), master.db_dir)
    return master, reports


@dataclass
class Snapshot:
    """Immutable bundle the query surfaces run against."""
    store: CdnStore
    corpus: Corpus
    pipeline: TextPipeline
    stats: CorpusTermStats
    index: InvertedIndex
    categories: list[CategoryVector] = field(default_factory=list)
    zone_spec: str = DEFAULT_OFFSET


def build_snapshot_index(cdn_dir: Path, *, coalesce: bool = False,
                         tau: float = 0.05,
                         text_pipeline: TextPipeline | None = None) -> Path:
    """(Re)build and persist cdn/index.json from the JSON database."""
    store = CdnStore(cdn_dir)
    corpus = load_corpus_dir(store.db_dir) if store.db_dir.is_dir() else Corpus()
    pipeline = text_pipeline or TextPipeline.default()
    stats = build_corpus_stats(corpus, pipeline)
    index = build_index(corpus, stats, pipeline)
    if coalesce:
        index = coalesce_index(index, CoalesceConfig(tolerance=tau))
    out = Path(cdn_dir) / "index.json"
    persist_index(index, out)
    return out


def load_snapshot(cdn_dir: Path, *, zone_spec: str = DEFAULT_OFFSET,
                  categories_path: Path | None = None,
                  text_pipeline: TextPipeline | None = None,
                  require_index: bool = False) -> Snapshot:
    """Load a CDN directory for querying; builds the index in memory when
    cdn/index.json is absent (unless require_index)."""
    cdn_dir = Path(cdn_dir)
    store = CdnStore(cdn_dir)
    corpus = load_corpus_dir(store.db_dir) if store.db_dir.is_dir() else Corpus()
    pipeline = text_pipeline or TextPipeline.default()
    stats = build_corpus_stats(corpus, pipeline)
    index_path = cdn_dir / "index.json"
    if index_path.exists():
        index = load_index(index_path)
        index.attach(corpus, stats, pipeline)
    elif require_index:
        raise FileNotFoundError(
            f"{index_path} is missing — run `tscdn index {cdn_dir}` first")
    else:
        index = build_index(corpus, stats, pipeline)
    categories = build_categories(load_category_seeds(categories_path), stats, pipeline)
    return Snapshot(store, corpus, pipeline, stats, index, categories, zone_spec)
