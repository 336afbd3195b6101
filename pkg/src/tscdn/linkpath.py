"""Link path canonicalization and media-kind classification.

Archive filenames arrive percent-encoded, in mixed scripts (Persian and
Latin side by side), with arbitrary case. Everything is normalized to
NFC Unicode, forward slashes, and a lexically resolved relative path.
"""
from __future__ import annotations

import posixpath
import re
import unicodedata
from urllib.parse import unquote_to_bytes, urlsplit

KINDS = ("video", "image", "audio", "document", "css", "js", "sticker", "icon", "other")

_EXT_KIND = {
    "mp4": "video", "m4v": "video", "mov": "video", "avi": "video",
    "mkv": "video", "webm": "video", "mpg": "video", "mpeg": "video", "3gp": "video",
    "jpg": "image", "jpeg": "image", "png": "image", "gif": "image",
    "bmp": "image", "webp": "image", "tif": "image", "tiff": "image", "svg": "image",
    "mp3": "audio", "ogg": "audio", "oga": "audio", "m4a": "audio",
    "wav": "audio", "flac": "audio", "opus": "audio", "aac": "audio",
    "pdf": "document", "doc": "document", "docx": "document", "xls": "document",
    "xlsx": "document", "ppt": "document", "pptx": "document", "txt": "document",
    "rtf": "document", "zip": "document", "rar": "document", "7z": "document",
    "gz": "document", "csv": "document", "epub": "document", "apk": "document",
    "css": "css",
    "js": "js",
    "tgs": "sticker",
    "ico": "icon",
}

_EXT_SAFE_RE = re.compile(r"^[a-z0-9]{1,10}$")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def extension_of(path: str) -> str:
    """Lowercase ASCII extension without the dot; empty when none/unsafe."""
    name = path.rsplit("/", 1)[-1]
    if "." not in name:
        return ""
    ext = name.rsplit(".", 1)[1].lower()
    return ext if _EXT_SAFE_RE.match(ext) else ""


def classify_kind(path: str) -> str:
    """Total classification by extension; unknown extensions map to other."""
    return _EXT_KIND.get(extension_of(path), "other")


def percent_decode(raw: str) -> tuple[str, bool]:
    """Percent-decode to NFC text; second value is False when decoding failed
    (invalid UTF-8 in the escapes), in which case raw is returned unchanged."""
    try:
        decoded = unquote_to_bytes(raw).decode("utf-8")
    except UnicodeDecodeError:
        return raw, False
    return nfc(decoded), True


def is_external(raw: str) -> bool:
    """True for URLs with a scheme or host part (not archive-local paths)."""
    try:
        parts = urlsplit(raw)
    except ValueError:
        return True
    return bool(parts.scheme) or bool(parts.netloc)


def canonical_relpath(raw: str) -> str | None:
    """Resolve a link value to a safe relative path inside the export root.

    Strips query/fragment, percent-decodes, NFC-normalizes, collapses "."
    and ".." lexically. Returns None when the result escapes the root
    (absolute, drive-letter, or leading "..") or is empty.
    """
    try:
        parts = urlsplit(raw)
    except ValueError:
        return None
    path = parts.path
    decoded, _ = percent_decode(path)
    decoded = decoded.replace("\\", "/")
    if not decoded or decoded.startswith("/"):
        return None
    if re.match(r"^[A-Za-z]:", decoded):
        return None
    norm = posixpath.normpath(decoded)
    if norm in (".", "") or norm.startswith("../") or norm == "..":
        return None
    return norm
