"""tscdn: content-addressed archival CDN and time-travel search for exported
news-channel HTML archives."""

from .corpus import (Corpus, CyberspaceSnapshot, EventId, EventVersion, MediaRef,
                     build_corpus, export_json_db, import_json_db, valid_interval)
from .index import (CoalesceConfig, InvertedIndex, PostingEntry, PostingList,
                    QuerySpec, ScoredEvent, build_index, coalesce, coalesce_index,
                    load_index, persist_index, query)
from .ingest import (LocalLink, RawMessage, SourceMeta, extract_links,
                     parse_export, scan_export)
from .scoring import (CategoryVector, CorpusTermStats, TermVector, TextPipeline,
                      adapt_categories, build_corpus_stats, build_event_vector,
                      build_query_vector, cosine, ief, normalize_token, tf,
                      tf_ief, tokenize)
from .store import (ArchiveStats, CdnStore, StoredObject, compute_stats,
                    decrease_percentage, hash_content, rewrite_references)
from .timeutil import normalize_timestamp

__version__ = "0.1.0"

__all__ = [
    "ArchiveStats", "CategoryVector", "CdnStore", "CoalesceConfig", "Corpus",
    "CorpusTermStats", "CyberspaceSnapshot", "EventId", "EventVersion",
    "InvertedIndex", "LocalLink", "MediaRef", "PostingEntry", "PostingList",
    "QuerySpec", "RawMessage", "ScoredEvent", "SourceMeta", "StoredObject",
    "TermVector", "TextPipeline", "adapt_categories", "build_corpus",
    "build_corpus_stats", "build_event_vector", "build_index",
    "build_query_vector", "coalesce", "coalesce_index", "compute_stats",
    "cosine", "decrease_percentage", "export_json_db", "extract_links",
    "hash_content", "ief", "import_json_db", "load_index", "normalize_timestamp",
    "normalize_token", "parse_export", "persist_index", "query",
    "rewrite_references", "scan_export", "tf", "tf_ief", "tokenize",
    "valid_interval",
]
