"""Content-addressed deduplicating media store.

Files are renamed to the lowercase hex digest of their bytes (MD5 by
default, 32 hex chars), keyed by (hash, extension). A JSON catalog
(cdn-index.json) records every stored object plus the per-archive
dictionary mapping original relative paths to stored names.
"""
from __future__ import annotations

import hashlib
import html as html_mod
import json
import os
import re
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .diag import Diagnostics
from .linkpath import canonical_relpath, classify_kind, extension_of, nfc
from .timeutil import iso_z

MISSING = "missing"

OBJECTS_DIR = "objects"
INDEX_FILE = "cdn-index.json"
REWRITTEN_DIR = "rewritten"
DB_DIR = "db"

STORED_NAME_RE = re.compile(r"^[0-9a-f]{32}(\.[a-z0-9]+)?$")


class StoreError(Exception):
    """Fatal store failure (write error, corrupt catalog)."""


class IntegrityError(StoreError):
    """Catalog and disk disagree in a way dedup cannot reconcile."""


def hash_content(data: bytes, algo: str = "md5") -> str:
    """Lowercase hex content digest; md5 by default, sha256 as config option."""
    if algo not in ("md5", "sha256"):
        raise ValueError(f"unsupported digest {algo!r}")
    return hashlib.new(algo, data).hexdigest()


def decrease_percentage(before: float | int, after: float | int) -> float:
    """100*(before-after)/before truncated to one decimal; 0.0 when before == 0.

    Truncation, not rounding: 79.5 -> 47.8 is 39.87...% and must print
    as 39.8, never 39.9.
    """
    b = Fraction(str(before)) if isinstance(before, float) else Fraction(before)
    a = Fraction(str(after)) if isinstance(after, float) else Fraction(after)
    if b <= 0:
        return 0.0
    tenths = (1000 * (b - a)) // b
    return int(tenths) / 10


@dataclass
class StoredObject:
    hash: str
    ext: str                  # lowercase, no dot, may be empty
    size: int
    kind: str
    first_seen: str           # ISO-8601 Z
    names: list[str] = field(default_factory=list)   # original filenames seen

    @property
    def stored_name(self) -> str:
        return f"{self.hash}.{self.ext}" if self.ext else self.hash

    def key(self) -> tuple[str, str]:
        return (self.hash, self.ext)


@dataclass
class ClassStats:
    items_before: int = 0
    items_after: int = 0
    bytes_before: int = 0
    bytes_after: int = 0

    @property
    def decrease_pct(self) -> float:
        return decrease_percentage(self.bytes_before, self.bytes_after)

    @property
    def decrease_pct_exact(self) -> float:
        if self.bytes_before <= 0:
            return 0.0
        return 100.0 * (self.bytes_before - self.bytes_after) / self.bytes_before


# Table-style media classes: css and js share one row, everything that is
# neither video nor image nor css/js counts as miscellaneous.
STAT_CLASSES = ("video", "image", "css_js", "misc")


def _stat_class(kind: str) -> str:
    if kind in ("video", "image"):
        return kind
    if kind in ("css", "js"):
        return "css_js"
    return "misc"


@dataclass
class ArchiveStats:
    classes: dict[str, ClassStats]

    def as_dict(self) -> dict:
        out = {}
        for name in STAT_CLASSES:
            cs = self.classes[name]
            out[name] = {
                "items_before": cs.items_before,
                "items_after": cs.items_after,
                "bytes_before": cs.bytes_before,
                "bytes_after": cs.bytes_after,
                "decrease_pct": cs.decrease_pct,
            }
        return out


def compute_stats(before: Iterable[tuple[str, int]],
                  after: Iterable[tuple[str, int]]) -> ArchiveStats:
    """Aggregate (kind, size) inventories into per-class before/after stats."""
    classes = {name: ClassStats() for name in STAT_CLASSES}
    for kind, size in before:
        cs = classes[_stat_class(kind)]
        cs.items_before += 1
        cs.bytes_before += size
    for kind, size in after:
        cs = classes[_stat_class(kind)]
        cs.items_after += 1
        cs.bytes_after += size
    return ArchiveStats(classes)


@dataclass
class MergeReport:
    objects_added: int = 0
    objects_deduplicated: int = 0
    bytes_saved: int = 0


@dataclass
class IntegrityReport:
    checked: int = 0
    mismatches: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


class CdnStore:
    """One CDN directory: objects/, cdn-index.json, rewritten/, db/."""

    def __init__(self, root: Path, *, algo: str = "md5",
                 clock: Callable[[], datetime] | None = None):
        self.root = Path(root)
        self.algo = algo
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self.objects: dict[tuple[str, str], StoredObject] = {}
        self.dictionaries: dict[str, dict[str, str]] = {}
        self.objects_dir.mkdir(parents=True, exist_ok=True)
        if self.index_path.exists():
            self._load_index()

    # -- paths -------------------------------------------------------------

    @property
    def objects_dir(self) -> Path:
        return self.root / OBJECTS_DIR

    @property
    def index_path(self) -> Path:
        return self.root / INDEX_FILE

    @property
    def rewritten_dir(self) -> Path:
        return self.root / REWRITTEN_DIR

    @property
    def db_dir(self) -> Path:
        return self.root / DB_DIR

    def object_path(self, obj: StoredObject) -> Path:
        return self.objects_dir / obj.stored_name

    # -- catalog persistence -------------------------------------------------

    def _load_index(self) -> None:
        try:
            doc = json.loads(self.index_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreError(f"cannot read {self.index_path}: {exc}") from exc
        if doc.get("version") != 1:
            raise StoreError(f"unsupported cdn-index version {doc.get('version')!r}")
        for entry in doc.get("objects", []):
            obj = StoredObject(entry["hash"], entry["ext"], entry["size"],
                               entry["kind"], entry["first_seen"],
                               list(entry.get("names", [])))
            self.objects[obj.key()] = obj
        for archive_id, mapping in doc.get("dictionaries", {}).items():
            self.dictionaries[archive_id] = dict(mapping)

    def save_index(self) -> None:
        doc = {
            "version": 1,
            "objects": [
                {"hash": o.hash, "ext": o.ext, "size": o.size, "kind": o.kind,
                 "first_seen": o.first_seen, "names": sorted(o.names)}
                for _, o in sorted(self.objects.items())
            ],
            "dictionaries": {
                archive: {path: name for path, name in sorted(mapping.items())}
                for archive, mapping in sorted(self.dictionaries.items())
            },
        }
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True),
                       encoding="utf-8")
        os.replace(tmp, self.index_path)

    # -- ingestion -----------------------------------------------------------

    def ingest_file(self, archive_id: str, original_path: str, data: bytes,
                    diag: Diagnostics | None = None) -> StoredObject:
        """Store bytes under their digest name; duplicate bytes write nothing."""
        original_path = nfc(original_path)
        digest = hash_content(data, self.algo)
        ext = extension_of(original_path)
        key = (digest, ext)
        obj = self.objects.get(key)
        basename = original_path.rsplit("/", 1)[-1]
        if obj is None:
            obj = StoredObject(digest, ext, len(data), classify_kind(original_path),
                               iso_z(self._clock()), [basename])
            self._write_object(obj, data)
            self.objects[key] = obj
        elif basename not in obj.names:
            obj.names.append(basename)
        self.dictionaries.setdefault(archive_id, {})[original_path] = obj.stored_name
        return obj

    def mark_missing(self, archive_id: str, original_path: str,
                     diag: Diagnostics | None = None) -> None:
        self.dictionaries.setdefault(archive_id, {})[nfc(original_path)] = MISSING
        if diag is not None:
            diag.warn("missing_media", archive=archive_id, path=original_path)

    def _write_object(self, obj: StoredObject, data: bytes) -> None:
        final = self.object_path(obj)
        if final.exists():
            return
        tmp = final.with_name(final.name + ".tmp")
        try:
            tmp.write_bytes(data)
            os.replace(tmp, final)
        except OSError as exc:
            raise StoreError(f"cannot write object {final}: {exc}") from exc

    def dictionary(self, archive_id: str) -> Mapping[str, str]:
        return self.dictionaries.get(archive_id, {})

    def get_object(self, stored_name: str) -> StoredObject | None:
        digest, dot, ext = stored_name.partition(".")
        return self.objects.get((digest, ext if dot else ""))

    def read_object(self, stored_name: str) -> bytes | None:
        obj = self.get_object(stored_name)
        if obj is None:
            return None
        try:
            return self.object_path(obj).read_bytes()
        except OSError:
            return None

    # -- inventories and stats -------------------------------------------------

    def inventory_before(self, archive_id: str | None = None) -> list[tuple[str, int]]:
        """(kind, size) of every ingested input, duplicates included."""
        archives = [archive_id] if archive_id else sorted(self.dictionaries)
        out = []
        for archive in archives:
            for _, stored in sorted(self.dictionaries.get(archive, {}).items()):
                if stored == MISSING:
                    continue
                obj = self.get_object(stored)
                if obj is not None:
                    out.append((obj.kind, obj.size))
        return out

    def inventory_after(self, archive_id: str | None = None) -> list[tuple[str, int]]:
        """(kind, size) of distinct stored objects (per archive when given)."""
        if archive_id is None:
            return [(o.kind, o.size) for _, o in sorted(self.objects.items())]
        seen: dict[tuple[str, str], StoredObject] = {}
        for stored in self.dictionaries.get(archive_id, {}).values():
            if stored == MISSING:
                continue
            obj = self.get_object(stored)
            if obj is not None:
                seen[obj.key()] = obj
        return [(o.kind, o.size) for _, o in sorted(seen.items())]

    def stats(self, archive_id: str | None = None) -> ArchiveStats:
        return compute_stats(self.inventory_before(archive_id),
                             self.inventory_after(archive_id))

    # -- merge -----------------------------------------------------------------

    def merge_from(self, other: "CdnStore") -> MergeReport:
        """Union another store into this one; duplicates contribute no bytes."""
        report = MergeReport()
        for key, theirs in sorted(other.objects.items()):
            mine = self.objects.get(key)
            if mine is None:
                data = other.object_path(theirs).read_bytes()
                obj = StoredObject(theirs.hash, theirs.ext, theirs.size, theirs.kind,
                                   theirs.first_seen, list(theirs.names))
                self._write_object(obj, data)
                self.objects[key] = obj
                report.objects_added += 1
            else:
                if mine.size != theirs.size:
                    raise IntegrityError(
                        f"object {theirs.stored_name} has size {theirs.size} in "
                        f"{other.root} but {mine.size} in {self.root}")
                for name in theirs.names:
                    if name not in mine.names:
                        mine.names.append(name)
                mine.first_seen = min(mine.first_seen, theirs.first_seen)
                report.objects_deduplicated += 1
                report.bytes_saved += theirs.size
        for archive_id, mapping in other.dictionaries.items():
            merged = self.dictionaries.setdefault(archive_id, {})
            for path, stored in mapping.items():
                if merged.get(path, MISSING) == MISSING:
                    merged[path] = stored
        if other.rewritten_dir.is_dir():
            for archive_dir in sorted(other.rewritten_dir.iterdir()):
                target = self.rewritten_dir / archive_dir.name
                if not target.exists():
                    shutil.copytree(archive_dir, target)
        self.save_index()
        return report

    # -- verification ------------------------------------------------------------

    def verify(self) -> IntegrityReport:
        """Re-hash every object and check filename == digest and size == disk."""
        report = IntegrityReport()
        for key, obj in sorted(self.objects.items()):
            report.checked += 1
            path = self.object_path(obj)
            try:
                data = path.read_bytes()
            except OSError as exc:
                report.mismatches.append(
                    {"object": obj.stored_name, "problem": "unreadable", "error": str(exc)})
                continue
            digest = hash_content(data, self.algo)
            if digest != obj.hash:
                report.mismatches.append(
                    {"object": obj.stored_name, "problem": "digest_mismatch", "actual": digest})
            elif len(data) != obj.size:
                report.mismatches.append(
                    {"object": obj.stored_name, "problem": "size_mismatch", "actual": len(data)})
        return report


# -- reference rewriting ----------------------------------------------------------

_ATTR_RE = re.compile(
    r"""(?P<name>\b(?:src|href|poster))\s*=\s*(?P<q>["'])(?P<value>.*?)(?P=q)""",
    re.IGNORECASE | re.DOTALL,
)


def rewrite_references(html: bytes | str, dictionary: Mapping[str, str],
                       cdn_prefix: str, diag: Diagnostics | None = None) -> bytes:
    """Replace dictionary-mapped link values with <cdn_prefix>/<stored name>.

    Bytes outside attribute values are untouched; unmapped local links are
    left as-is with a warning (never dropped). Idempotent: rewritten values
    resolve to paths that are not dictionary keys.
    """
    diag = diag if diag is not None else Diagnostics()
    text = html.decode("utf-8", errors="replace") if isinstance(html, bytes) else html
    prefix = cdn_prefix.rstrip("/")

    def replace(m: re.Match) -> str:
        raw = m.group("value")
        unescaped = html_mod.unescape(raw)
        resolved = canonical_relpath(unescaped)
        if resolved is None:
            return m.group(0)
        stored = dictionary.get(resolved)
        if stored is None or stored == MISSING:
            if extension_of(resolved) not in ("html", "htm"):
                diag.warn("unmapped_link", path=resolved)
            return m.group(0)
        return f"{m.group('name')}={m.group('q')}{prefix}/{stored}{m.group('q')}"

    return _ATTR_RE.sub(replace, text).encode("utf-8")


def reference_closure(store: CdnStore, cdn_prefix: str) -> list[str]:
    """Dangling cdn-prefixed links in the store's rewritten HTML (empty = closed)."""
    prefix = cdn_prefix.rstrip("/") + "/"
    dangling = []
    if not store.rewritten_dir.is_dir():
        return dangling
    for path in sorted(store.rewritten_dir.rglob("*")):
        if path.suffix.lower() not in (".html", ".htm"):
            continue
        text = path.read_text(encoding="utf-8", errors="replace")
        for m in _ATTR_RE.finditer(text):
            value = html_mod.unescape(m.group("value"))
            idx = value.find(prefix)
            if idx < 0:
                continue
            stored = value[idx + len(prefix):]
            if not STORED_NAME_RE.match(stored) or store.get_object(stored) is None:
                dangling.append(f"{path}: {value}")
    return dangling
