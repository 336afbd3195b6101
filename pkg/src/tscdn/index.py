"""Time-travel inverted index: per-term posting lists with valid-time
intervals, temporal coalescing, and keyword+interval query evaluation.

A posting entry pins one event version: the term's repetition count and the
interval during which that version was the current one. Open intervals keep
end=None (the "now" marker orders after every stored instant, so matching
treats it as unbounded).
"""
from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

from .corpus import Corpus, EventId, valid_interval
from .scoring import (CorpusTermStats, TextPipeline, build_event_vector,
                      build_query_vector, cosine, tf_ief_counts)
from .timeutil import iso_z, normalize_timestamp, UTC

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

Scorer = Callable[[str, "PostingEntry"], float]


class EmptyQueryError(Exception):
    """No query terms survive normalization."""


class InvalidIntervalError(Exception):
    """Query interval with t_b > t_e."""


class IndexFormatError(Exception):
    """Persisted index is corrupt, truncated, or a wrong version."""


@dataclass(frozen=True)
class PostingEntry:
    event: EventId
    begin: datetime
    end: datetime | None          # None = open "now" marker
    repetition: int
    positions: tuple[int, ...]

    def intersects(self, t_b: datetime | None, t_e: datetime | None) -> bool:
        """Does [begin, end) intersect the closed query window [t_b, t_e]?"""
        if t_e is not None and self.begin > t_e:
            return False
        if t_b is not None and self.end is not None and self.end <= t_b:
            return False
        return True


@dataclass
class PostingList:
    term: str
    entries: list[PostingEntry] = field(default_factory=list)

    def sort(self) -> None:
        self.entries.sort(key=lambda e: (e.event, e.begin))


@dataclass
class CoalesceConfig:
    tolerance: float = 0.05       # relative score band anchored at the run head
    enabled: bool = True

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")


@dataclass
class QuerySpec:
    keywords: list[str]
    interval: tuple[datetime | None, datetime | None] = (None, None)
    channels: list[str] | None = None
    limit: int | None = None
    offset: int = 0
    coalesced: bool = False
    all_terms: bool = False


@dataclass
class ScoredEvent:
    event: EventId
    timestamp: datetime
    matched_intervals: list[tuple[datetime, datetime | None]]
    tf_ief_sum: float
    cosine: float
    repetitions: dict[str, int]


class InvertedIndex:
    def __init__(self, built_at: datetime):
        self.built_at = built_at
        self.dictionary: dict[str, PostingList] = {}
        self.coalesce_config: CoalesceConfig | None = None
        # attached context (not persisted): scoring needs the corpus side
        self.corpus: Corpus | None = None
        self.corpus_stats: CorpusTermStats | None = None
        self.pipeline: TextPipeline | None = None
        self._version_counts: dict[tuple[EventId, datetime], tuple[Counter, int]] = {}
        self._coalesced_cache: dict[str, PostingList] = {}

    def attach(self, corpus: Corpus, stats: CorpusTermStats, pipeline: TextPipeline) -> None:
        """Re-attach scoring context after load_index."""
        self.corpus = corpus
        self.corpus_stats = stats
        self.pipeline = pipeline
        if not self._version_counts:
            for event, chain in corpus.events.items():
                for version in chain:
                    terms = pipeline.terms(version.text)
                    self._version_counts[(event, version.timestamp)] = \
                        (Counter(terms), len(terms))

    def scorer(self) -> Scorer:
        stats = self.corpus_stats
        if stats is None:
            raise IndexFormatError("index has no attached corpus stats; call attach()")

        def score(term: str, entry: PostingEntry) -> float:
            counts, total = self._version_counts.get((entry.event, entry.begin), (Counter(), 0))
            return tf_ief_counts(term, counts, total, stats)

        return score

    def posting(self, term: str, *, coalesced: bool = False,
                cfg: CoalesceConfig | None = None) -> PostingList:
        plist = self.dictionary.get(term, PostingList(term))
        if not coalesced:
            return plist
        if self.coalesce_config is not None:
            return plist                       # already coalesced at build time
        cached = self._coalesced_cache.get(term)
        if cached is None:
            cached = coalesce(plist, self.scorer(), cfg or CoalesceConfig())
            self._coalesced_cache[term] = cached
        return cached

    def structural(self) -> tuple:
        return (iso_z(self.built_at),
                {t: [(str(e.event), iso_z(e.begin), e.end and iso_z(e.end),
                      e.repetition, e.positions) for e in pl.entries]
                 for t, pl in self.dictionary.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return self.structural() == other.structural()


def build_index(corpus: Corpus, stats: CorpusTermStats, pipeline: TextPipeline,
                *, built_at: datetime | None = None) -> InvertedIndex:
    """Index every event version. built_at defaults to the newest crawl time
    so that identical corpora produce byte-identical persisted files."""
    if built_at is None:
        built_at = corpus.max_crawl_time() or EPOCH
    index = InvertedIndex(built_at)
    index.corpus = corpus
    index.corpus_stats = stats
    index.pipeline = pipeline

    for event in corpus.sorted_events():
        chain = corpus.events[event]
        for i, version in enumerate(chain):
            successor = chain[i + 1] if i + 1 < len(chain) else None
            begin, end = valid_interval(version, successor)
            indexed = pipeline.indexed_terms(version.text)
            index._version_counts[(event, begin)] = \
                (Counter(term for _, term in indexed), len(indexed))
            positions: dict[str, list[int]] = {}
            for pos, term in indexed:
                positions.setdefault(term, []).append(pos)
            for term, pos_list in positions.items():
                plist = index.dictionary.setdefault(term, PostingList(term))
                plist.entries.append(PostingEntry(event, begin, end,
                                                  len(pos_list), tuple(pos_list)))
    for plist in index.dictionary.values():
        plist.sort()
    return index


# -- temporal coalescing -------------------------------------------------------

def coalesce(plist: PostingList, scorer: Scorer, cfg: CoalesceConfig) -> PostingList:
    """Merge, per event, maximal runs of time-adjacent entries whose scores sit
    within cfg.tolerance (relative, anchored at the run head). The merged entry
    spans [first.begin, last.end) and keeps the anchor's repetition/positions,
    so the per-event interval union is preserved exactly."""
    out = PostingList(plist.term)
    if not cfg.enabled:
        out.entries = list(plist.entries)
        return out

    by_event: dict[EventId, list[PostingEntry]] = {}
    for entry in plist.entries:
        by_event.setdefault(entry.event, []).append(entry)

    for event in sorted(by_event):
        entries = sorted(by_event[event], key=lambda e: e.begin)
        i = 0
        while i < len(entries):
            anchor = entries[i]
            anchor_score = scorer(plist.term, anchor)
            j = i
            while j + 1 < len(entries):
                current, nxt = entries[j], entries[j + 1]
                if current.end is None or current.end != nxt.begin:
                    break
                if abs(scorer(plist.term, nxt) - anchor_score) > cfg.tolerance * abs(anchor_score):
                    break
                j += 1
            if j == i:
                out.entries.append(anchor)
            else:
                out.entries.append(replace(anchor, end=entries[j].end))
            i = j + 1
    out.sort()
    return out


def coalesce_index(index: InvertedIndex, cfg: CoalesceConfig) -> InvertedIndex:
    """A new index value with every posting list coalesced."""
    scorer = index.scorer()
    out = InvertedIndex(index.built_at)
    out.corpus = index.corpus
    out.corpus_stats = index.corpus_stats
    out.pipeline = index.pipeline
    out._version_counts = index._version_counts
    out.coalesce_config = cfg
    for term in sorted(index.dictionary):
        out.dictionary[term] = coalesce(index.dictionary[term], scorer, cfg)
    return out


# -- query evaluation ------------------------------------------------------------

def normalize_query(keywords: list[str], pipeline: TextPipeline) -> list[str]:
    terms: list[str] = []
    for keyword in keywords:
        terms.extend(pipeline.terms(keyword))
    if not terms:
        raise EmptyQueryError("no query terms survive normalization")
    return terms


def query(index: InvertedIndex, spec: QuerySpec) -> list[ScoredEvent]:
    """Events with at least one query-term posting intersecting the window
    (all terms with --all-terms), ranked by cosine, then tf_ief_sum, then
    event timestamp, then event id."""
    if index.corpus is None or index.corpus_stats is None or index.pipeline is None:
        raise IndexFormatError("index has no attached corpus; call attach()")
    t_b, t_e = spec.interval
    if t_b is not None and t_e is not None and t_b > t_e:
        raise InvalidIntervalError(f"t_b {iso_z(t_b)} is after t_e {iso_z(t_e)}")
    terms = normalize_query(spec.keywords, index.pipeline)
    unique_terms = sorted(set(terms))
    channels = set(spec.channels) if spec.channels else None

    matched: dict[EventId, dict[str, list[PostingEntry]]] = {}
    for term in unique_terms:
        plist = index.posting(term, coalesced=spec.coalesced)
        for entry in plist.entries:
            if channels is not None and entry.event.channel_slug not in channels:
                continue
            if entry.intersects(t_b, t_e):
                matched.setdefault(entry.event, {}).setdefault(term, []).append(entry)

    stats = index.corpus_stats
    query_vector = build_query_vector(terms, stats)
    results = []
    for event, per_term in matched.items():
        if spec.all_terms and len(per_term) < len(unique_terms):
            continue
        intervals = sorted({(e.begin, e.end) for entries in per_term.values()
                            for e in entries},
                           key=lambda iv: (iv[0], iv[1] or datetime.max.replace(tzinfo=timezone.utc)))
        tf_ief_sum = sum(
            tf_ief_counts(term, stats.terms_of(event),
                          stats.event_totals.get(event, 0), stats)
            for term in unique_terms)
        results.append(ScoredEvent(
            event=event,
            timestamp=index.corpus.events[event][0].timestamp,
            matched_intervals=list(intervals),
            tf_ief_sum=tf_ief_sum,
            cosine=cosine(query_vector, build_event_vector(event, stats)),
            repetitions={term: sum(e.repetition for e in entries)
                         for term, entries in sorted(per_term.items())},
        ))

    results.sort(key=lambda r: (-r.cosine, -r.tf_ief_sum, r.timestamp, r.event))
    if spec.offset:
        results = results[spec.offset:]
    if spec.limit is not None:
        results = results[:spec.limit]
    return results


# -- persistence -------------------------------------------------------------------

INDEX_SCHEMA = 1


def _index_doc(index: InvertedIndex) -> dict:
    terms = {}
    for term in sorted(index.dictionary):
        plist = index.dictionary[term]
        terms[term] = [
            [e.event.channel_slug, e.event.local_id, iso_z(e.begin),
             iso_z(e.end) if e.end is not None else None,
             e.repetition, list(e.positions)]
            for e in sorted(plist.entries, key=lambda e: (e.event, e.begin))
        ]
    return {"schema": INDEX_SCHEMA, "built_at": iso_z(index.built_at), "terms": terms}


def persist_index(index: InvertedIndex, path: Path) -> None:
    """Single compact JSON line plus a whole-file md5 checksum line."""
    body = json.dumps(_index_doc(index), ensure_ascii=False,
                      sort_keys=True, separators=(",", ":"))
    checksum = hashlib.md5(body.encode("utf-8")).hexdigest()
    Path(path).write_text(body + "\nmd5:" + checksum + "\n", encoding="utf-8")


def load_index(path: Path) -> InvertedIndex:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IndexFormatError(f"cannot read index {path}: {exc}") from exc
    lines = raw.splitlines()
    if len(lines) < 2:
        raise IndexFormatError("index file is truncated: checksum line missing")
    body, checksum_line = lines[0], lines[1]
    if not checksum_line.startswith("md5:"):
        raise IndexFormatError("index file has no md5 checksum line")
    if hashlib.md5(body.encode("utf-8")).hexdigest() != checksum_line[4:]:
        raise IndexFormatError("index checksum mismatch (corrupt or truncated file)")
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"index body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != INDEX_SCHEMA:
        raise IndexFormatError(f"unsupported index schema {doc.get('schema')!r}")

    built_at = normalize_timestamp(doc.get("built_at", ""), UTC)
    if built_at is None:
        raise IndexFormatError("index built_at timestamp is unparseable")
    index = InvertedIndex(built_at)
    try:
        for term, entries in doc["terms"].items():
            plist = PostingList(term)
            for channel, local_id, begin_s, end_s, repetition, positions in entries:
                begin = normalize_timestamp(begin_s, UTC)
                end = normalize_timestamp(end_s, UTC) if end_s is not None else None
                if begin is None or (end_s is not None and end is None):
                    raise IndexFormatError(f"bad interval in posting for {term!r}")
                plist.entries.append(PostingEntry(EventId(channel, local_id), begin,
                                                  end, int(repetition),
                                                  tuple(int(p) for p in positions)))
            plist.sort()
            index.dictionary[term] = plist
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexFormatError(f"malformed index structure: {exc}") from exc
    return index
