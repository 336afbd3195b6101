"""Versioned event model and the per-channel JSON message database.

An event is one channel message; each crawl that observes a changed text
adds a version. A version is valid from its timestamp until the next
version's timestamp, or open-ended (end marker None) for the newest one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable

from .diag import Diagnostics
from .ingest import RawMessage
from .linkpath import nfc
from .timeutil import UTC, iso_z, normalize_timestamp

MediaLookup = Callable[[str, str], "MediaRef | None"]


class CorpusError(Exception):
    """Event model violation (non-increasing version chain, etc.)."""


class SchemaError(Exception):
    """JSON DB file does not conform to the expected schema version."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message + (f" (at {pointer})" if pointer else ""))
        self.pointer = pointer


@dataclass(frozen=True, order=True)
class EventId:
    channel_slug: str
    local_id: str

    def __str__(self) -> str:
        return f"{self.channel_slug}/{self.local_id}"


@dataclass(frozen=True)
class MediaRef:
    kind: str
    hash: str
    ext: str
    size: int


@dataclass
class EventVersion:
    event: EventId
    timestamp: datetime
    text: str
    media: list[MediaRef] = field(default_factory=list)
    views: int | None = None
    forwarded_from: str | None = None

    @property
    def valid_from(self) -> datetime:
        return self.timestamp

    def content_key(self) -> tuple[str, tuple[tuple[str, str], ...]]:
        """Collapse identity: text plus the multiset of media hashes."""
        return (self.text, tuple(sorted((m.hash, m.ext) for m in self.media)))


@dataclass(frozen=True)
class CyberspaceSnapshot:
    channel_slug: str
    crawl_time: datetime
    archive_id: str


def valid_interval(version: EventVersion,
                   successor: EventVersion | None) -> tuple[datetime, datetime | None]:
    """[t_i, t_{i+1}) when a newer version exists, else [t_i, None) — the open
    marker stands for "now", later than any stored instant."""
    if successor is None:
        return (version.timestamp, None)
    if successor.timestamp <= version.timestamp:
        raise CorpusError(
            f"version chain for {version.event} is not strictly increasing: "
            f"{iso_z(successor.timestamp)} after {iso_z(version.timestamp)}")
    return (version.timestamp, successor.timestamp)


class Corpus:
    def __init__(self) -> None:
        self.channels: dict[str, str] = {}          # slug -> display name
        self.events: dict[EventId, list[EventVersion]] = {}
        self.snapshots: list[CyberspaceSnapshot] = []

    @property
    def event_count(self) -> int:
        return len(self.events)

    def versions(self, event: EventId) -> list[EventVersion]:
        return self.events.get(event, [])

    def latest(self, event: EventId) -> EventVersion:
        return self.events[event][-1]

    def intervals(self, event: EventId) -> list[tuple[datetime, datetime | None]]:
        chain = self.events[event]
        return [valid_interval(v, chain[i + 1] if i + 1 < len(chain) else None)
                for i, v in enumerate(chain)]

    def min_timestamp(self) -> datetime | None:
        stamps = [chain[0].timestamp for chain in self.events.values()]
        return min(stamps) if stamps else None

    def max_crawl_time(self) -> datetime | None:
        times = [s.crawl_time for s in self.snapshots]
        return max(times) if times else None

    def sorted_events(self) -> list[EventId]:
        return sorted(self.events, key=lambda e: (self.events[e][0].timestamp, e))

    def __eq__(self, other: object) -> bool:
        # round-trip identity: channels plus version chains (snapshots are
        # ingestion provenance, not serialized by the DB schema)
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.channels == other.channels and self.events == other.events

    def add_snapshot(self, snapshot: CyberspaceSnapshot, messages: Iterable[RawMessage],
                     *, channel_name: str | None = None,
                     media_lookup: MediaLookup | None = None,
                     diag: Diagnostics | None = None) -> int:
        """Fold one crawl into the corpus; returns how many messages were used.

        Messages with invalid timestamps are excluded (counted via diag).
        A message whose (text, media) equals the event's latest version is
        collapsed; a changed one becomes a new version stamped with the
        snapshot's crawl time.
        """
        diag = diag if diag is not None else Diagnostics()
        self.snapshots.append(snapshot)
        if channel_name:
            self.channels[snapshot.channel_slug] = channel_name
        else:
            self.channels.setdefault(snapshot.channel_slug, snapshot.channel_slug)

        used = 0
        seen_in_snapshot: dict[EventId, EventVersion] = {}
        for message in messages:
            if message.timestamp is None:
                diag.warn("message_without_valid_timestamp",
                          channel=snapshot.channel_slug, message=message.message_id)
                continue
            event = EventId(snapshot.channel_slug, message.message_id)
            media: list[MediaRef] = []
            for link in message.media_links:
                if media_lookup is None:
                    continue
                ref = media_lookup(snapshot.archive_id, link.resolved_path)
                if ref is None:
                    diag.warn("media_unresolved", event=str(event), path=link.resolved_path)
                else:
                    media.append(ref)
            incoming = EventVersion(event, message.timestamp, nfc(message.text),
                                    media, message.views, message.forwarded_from)

            prior = seen_in_snapshot.get(event)
            if prior is not None:
                if prior.content_key() != incoming.content_key():
                    diag.warn("duplicate_event_conflict", event=str(event),
                              crawl=iso_z(snapshot.crawl_time))
                    self._replace_last(event, incoming)
                    seen_in_snapshot[event] = incoming
                continue
            seen_in_snapshot[event] = incoming

            chain = self.events.get(event)
            if chain is None:
                self.events[event] = [incoming]
                used += 1
                continue
            latest = chain[-1]
            if latest.content_key() == incoming.content_key():
                if incoming.views is not None:
                    latest.views = incoming.views   # later observation wins
                used += 1
                continue
            if snapshot.crawl_time <= latest.timestamp:
                diag.warn("version_not_after_predecessor", event=str(event),
                          crawl=iso_z(snapshot.crawl_time))
                continue
            incoming.timestamp = snapshot.crawl_time
            chain.append(incoming)
            used += 1
        return used

    def _replace_last(self, event: EventId, version: EventVersion) -> None:
        chain = self.events[event]
        version.timestamp = chain[-1].timestamp
        chain[-1] = version


def build_corpus(groups: Iterable[tuple[CyberspaceSnapshot, list[RawMessage]]],
                 *, channel_names: dict[str, str] | None = None,
                 media_lookup: MediaLookup | None = None,
                 diag: Diagnostics | None = None) -> Corpus:
    """Build a corpus from crawl snapshots, oldest crawl first."""
    corpus = Corpus()
    names = channel_names or {}
    for snapshot, messages in sorted(groups, key=lambda g: (g[0].crawl_time, g[0].archive_id)):
        corpus.add_snapshot(snapshot, messages,
                            channel_name=names.get(snapshot.channel_slug),
                            media_lookup=media_lookup, diag=diag)
    return corpus


# -- JSON database (schema v1) -------------------------------------------------

def _channel_doc(corpus: Corpus, slug: str) -> dict:
    messages = []
    for event in corpus.sorted_events():
        if event.channel_slug != slug:
            continue
        for version in corpus.events[event]:
            messages.append({
                "id": event.local_id,
                "date_utc": iso_z(version.timestamp),
                "text": version.text,
                "views": version.views,
                "forwarded_from": version.forwarded_from,
                "media": [{"kind": m.kind, "hash": m.hash, "ext": m.ext, "bytes": m.size}
                          for m in version.media],
            })
    return {
        "schema": 1,
        "channel": slug,
        "channel_name": corpus.channels[slug],
        "messages": messages,
    }


def export_json_db(corpus: Corpus, out_dir: Path) -> list[Path]:
    """One <channel_slug>.json per channel, deterministic key order."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CorpusError(f"cannot create {out}: {exc}") from exc
    written = []
    for slug in sorted(corpus.channels):
        doc = _channel_doc(corpus, slug)
        path = out / f"{slug}.json"
        try:
            path.write_text(json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True),
                            encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written


def _require(doc: dict, key: str, pointer: str):
    if key not in doc:
        raise SchemaError(f"missing key {key!r}", pointer)
    return doc[key]


def import_json_db(path: Path) -> Corpus:
    """Inverse of export_json_db for one channel file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read JSON DB {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "/")
    schema = _require(doc, "schema", "/schema")
    if schema != 1:
        raise SchemaError(f"unknown schema version {schema!r}", "/schema")
    slug = _require(doc, "channel", "/channel")
    name = _require(doc, "channel_name", "/channel_name")
    messages = _require(doc, "messages", "/messages")
    if not isinstance(messages, list):
        raise SchemaError("messages must be an array", "/messages")

    corpus = Corpus()
    corpus.channels[slug] = name
    chains: dict[EventId, list[EventVersion]] = {}
    for i, m in enumerate(messages):
        pointer = f"/messages/{i}"
        if not isinstance(m, dict):
            raise SchemaError("message must be an object", pointer)
        local_id = str(_require(m, "id", pointer + "/id"))
        stamp = normalize_timestamp(_require(m, "date_utc", pointer + "/date_utc"), UTC)
        if stamp is None:
            raise SchemaError("unparseable date_utc", pointer + "/date_utc")
        media = []
        for j, entry in enumerate(m.get("media", [])):
            mp = f"{pointer}/media/{j}"
            media.append(MediaRef(str(_require(entry, "kind", mp)),
                                  str(_require(entry, "hash", mp)),
                                  str(_require(entry, "ext", mp)),
                                  int(_require(entry, "bytes", mp))))
        event = EventId(slug, local_id)
        version = EventVersion(event, stamp, nfc(str(m.get("text", ""))), media,
                               m.get("views"), m.get("forwarded_from"))
        chains.setdefault(event, []).append(version)

    for event, chain in chains.items():
        chain.sort(key=lambda v: v.timestamp)
        for a, b in zip(chain, chain[1:]):
            if b.timestamp <= a.timestamp:
                raise SchemaError(f"versions of {event} not strictly increasing",
                                  "/messages")
        corpus.events[event] = chain

    crawl = max((chain[-1].timestamp for chain in chains.values()), default=None)
    if crawl is not None:
        corpus.snapshots.append(CyberspaceSnapshot(slug, crawl, slug))
    return corpus


def merge_corpora(corpora: Iterable[Corpus]) -> Corpus:
    """Union of channels and events; shared events merge their version chains."""
    merged = Corpus()
    for corpus in corpora:
        for slug, name in corpus.channels.items():
            merged.channels.setdefault(slug, name)
        merged.snapshots.extend(corpus.snapshots)
        for event, chain in corpus.events.items():
            mine = merged.events.setdefault(event, [])
            known = {(v.timestamp, v.content_key()) for v in mine}
            for version in chain:
                if (version.timestamp, version.content_key()) not in known:
                    mine.append(version)
                    known.add((version.timestamp, version.content_key()))
            mine.sort(key=lambda v: v.timestamp)
    return merged


def load_corpus_dir(db_dir: Path) -> Corpus:
    """Load and merge every <slug>.json under a db directory."""
    files = sorted(Path(db_dir).glob("*.json"))
    return merge_corpora(import_json_db(p) for p in files)
