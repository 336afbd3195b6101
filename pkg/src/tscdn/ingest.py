"""Parse exported channel HTML archives into raw messages.

Targets the Telegram Desktop "Export chat history" HTML layout; every
selector lives in ExportProfile so other dump flavors can be profiled
without touching the extraction code.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from .diag import Diagnostics
from .dom import Element, parse_html
from .linkpath import canonical_relpath, classify_kind, is_external, nfc, percent_decode
from .timeutil import DEFAULT_OFFSET, fixed_offset, normalize_timestamp

LINK_ATTRIBUTES = ("src", "href", "poster")

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class IngestError(Exception):
    """Fatal ingestion failure (unreadable export directory, etc.)."""


@dataclass
class SourceMeta:
    channel_name: str
    channel_slug: str
    export_root: Path
    crawl_time: datetime

    def __post_init__(self):
        if not self.channel_slug:
            raise IngestError("channel_slug must be non-empty")
        self.export_root = Path(self.export_root)
        self.crawl_time = self.crawl_time.astimezone(timezone.utc).replace(microsecond=0)


@dataclass
class LocalLink:
    attribute: str            # src | href | poster
    raw_path: str             # exactly as found in the markup
    resolved_path: str        # percent-decoded, NFC, lexically canonical
    kind: str                 # classify_kind(resolved_path)
    decode_ok: bool = True    # False when percent-decoding failed

    @classmethod
    def from_raw(cls, attribute: str, raw: str) -> "LocalLink | None":
        """Build a link from an attribute value; None for external/escaping ones."""
        if is_external(raw):
            return None
        resolved = canonical_relpath(raw)
        if resolved is None:
            return None
        _, ok = percent_decode(raw)
        if not ok:
            # undecodable escapes: keep the raw string so nothing is lost
            return cls(attribute, raw, nfc(raw), classify_kind(nfc(raw)), decode_ok=False)
        return cls(attribute, raw, resolved, classify_kind(resolved))


@dataclass
class RawMessage:
    source_ordinal: int
    message_id: str
    timestamp: datetime | None    # None = invalid, excluded from the temporal index
    timestamp_raw: str | None
    text: str
    media_links: list[LocalLink] = field(default_factory=list)
    views: int | None = None
    forwarded_from: str | None = None


@dataclass
class ExportProfile:
    """CSS-class conventions of one export layout (Telegram Desktop defaults)."""
    message_classes: tuple[str, ...] = ("message", "default")
    date_classes: tuple[str, ...] = ("date", "details")
    text_classes: tuple[str, ...] = ("text",)
    forwarded_classes: tuple[str, ...] = ("forwarded",)
    from_name_classes: tuple[str, ...] = ("from_name",)
    views_classes: tuple[str, ...] = ("views",)
    header_name_classes: tuple[str, ...] = ("text", "bold")
    id_prefix: str = "message"


DEFAULT_PROFILE = ExportProfile()


def scan_export(export_root: Path, channel: SourceMeta | None = None,
                diag: Diagnostics | None = None) -> Iterator[tuple[Path, bytes]]:
    """Yield every .html/.htm file under export_root in lexicographic path order.

    Unreadable directory is fatal; an unreadable file is skipped with a warning.
    """
    diag = diag if diag is not None else Diagnostics()
    root = Path(export_root)
    if not root.is_dir():
        raise IngestError(f"export root {root} does not exist or is not a directory")
    try:
        candidates = sorted(
            (p for p in root.rglob("*") if p.suffix.lower() in (".html", ".htm") and not p.is_dir()),
            key=lambda p: p.relative_to(root).as_posix(),
        )
    except OSError as exc:
        raise IngestError(f"cannot list export root {root}: {exc}") from exc
    for path in candidates:
        try:
            data = path.read_bytes()
        except OSError as exc:
            diag.warn("unreadable_file", path=str(path), error=str(exc))
            continue
        yield path, data


def iter_link_elements(root: Element) -> Iterator[tuple[str, str]]:
    """(attribute, raw value) pairs for src/href/poster in document order."""
    for el in root.iter():
        for name, value in el.attrs:
            if name in LINK_ATTRIBUTES and value is not None:
                yield name, value


def links_from_element(root: Element) -> list[LocalLink]:
    out = []
    for attribute, raw in iter_link_elements(root):
        link = LocalLink.from_raw(attribute, raw)
        if link is not None:
            out.append(link)
    return out


def extract_links(html_fragment: bytes | str) -> list[LocalLink]:
    """Every relative src/href/poster link in the fragment, document order.

    External URLs (with scheme or host) and paths escaping the export root
    are excluded. Duplicates are preserved.
    """
    text = html_fragment.decode("utf-8", errors="replace") if isinstance(html_fragment, bytes) \
        else html_fragment
    return links_from_element(parse_html(text))


def _decode(html_bytes: bytes, diag: Diagnostics) -> str:
    try:
        return html_bytes.decode("utf-8")
    except UnicodeDecodeError:
        diag.warn("lossy_decode", detail="input was not valid UTF-8, bad bytes replaced")
        return html_bytes.decode("utf-8", errors="replace")


def _message_text(block: Element, profile: ExportProfile) -> str:
    parts = []
    for el in block.find_all("div", *profile.text_classes):
        # skip nested .text divs so forwarded content is not double-counted
        ancestor = el.parent
        nested = False
        while ancestor is not None and ancestor is not block:
            if ancestor.tag == "div" and ancestor.has_classes(*profile.text_classes):
                nested = True
                break
            ancestor = ancestor.parent
        if not nested:
            text = el.text()
            if text:
                parts.append(text)
    return nfc(" ".join(parts))


def _parse_views(block: Element, profile: ExportProfile) -> int | None:
    el = block.find(None, *profile.views_classes)
    if el is None:
        return None
    m = re.search(r"\d+", el.text().replace(",", ""))
    if m is None:
        return None
    views = int(m.group(0))
    return views if views >= 0 else None


def channel_title(html_bytes: bytes, profile: ExportProfile = DEFAULT_PROFILE) -> str | None:
    """Display name from the export page header, when present."""
    root = parse_html(html_bytes.decode("utf-8", errors="replace"))
    header = root.find("div", "page_header")
    if header is None:
        return None
    name = header.find("div", *profile.header_name_classes)
    return nfc(name.text()) if name is not None and name.text() else None


def parse_export(html_bytes: bytes, source: SourceMeta, *,
                 profile: ExportProfile = DEFAULT_PROFILE,
                 doc_name: str = "doc",
                 ordinal_start: int = 0,
                 assumed_zone_spec: str = DEFAULT_OFFSET,
                 diag: Diagnostics | None = None) -> list[RawMessage]:
    """One RawMessage per message block, in source order. Never raises on
    malformed markup; pages with no recognizable blocks yield [] plus a warning.
    """
    diag = diag if diag is not None else Diagnostics()
    zone = fixed_offset(assumed_zone_spec)
    root = parse_html(_decode(html_bytes, diag))

    blocks = [el for el in root.iter()
              if el.tag == "div" and el.has_classes(*profile.message_classes)]
    if not blocks:
        diag.warn("no_message_blocks", doc=doc_name)
        return []

    messages: list[RawMessage] = []
    for offset, block in enumerate(blocks):
        ordinal = ordinal_start + offset

        raw_id = block.attr("id") or ""
        if raw_id:
            message_id = raw_id[len(profile.id_prefix):] if raw_id.startswith(profile.id_prefix) \
                and len(raw_id) > len(profile.id_prefix) else raw_id
        else:
            message_id = f"{doc_name}#{ordinal}"

        date_el = None
        for el in block.find_all(None, *profile.date_classes):
            if el.attr("title"):
                date_el = el
                break
        timestamp_raw = date_el.attr("title") if date_el is not None else None
        timestamp = normalize_timestamp(timestamp_raw, zone) if timestamp_raw else None
        if timestamp is not None and not (EPOCH <= timestamp <= source.crawl_time):
            diag.warn("timestamp_out_of_range", message=message_id, value=timestamp_raw)
            timestamp = None
        elif timestamp is None:
            diag.warn("timestamp_invalid", message=message_id, value=timestamp_raw)

        forwarded_from = None
        fwd = block.find("div", *profile.forwarded_classes)
        if fwd is not None:
            name_el = fwd.find("div", *profile.from_name_classes)
            if name_el is not None:
                # direct text only: the div also holds an inline date span
                direct = " ".join(c for c in name_el.children if isinstance(c, str))
                forwarded_from = nfc(" ".join(direct.split())) or None

        messages.append(RawMessage(
            source_ordinal=ordinal,
            message_id=nfc(message_id),
            timestamp=timestamp,
            timestamp_raw=timestamp_raw,
            text=_message_text(block, profile),
            media_links=links_from_element(block),
            views=_parse_views(block, profile),
            forwarded_from=forwarded_from,
        ))
    return messages
