"""Timestamp parsing and formatting helpers.

Exports carry local wall-clock times; everything downstream is UTC. The
assumed zone is a fixed offset (default +03:30) supplied by configuration.
"""
from __future__ import annotations

import re
from datetime import date, datetime, timedelta, timezone

UTC = timezone.utc

DEFAULT_OFFSET = "+03:30"

_OFFSET_RE = re.compile(r"^([+-])(\d{2}):(\d{2})$")

# "23.03.2020 08:15", "23.03.2020 08:15:42", optionally "... UTC+03:30"
_DOTTED_RE = re.compile(
    r"^(\d{2})\.(\d{2})\.(\d{4})\s+(\d{2}):(\d{2})(?::(\d{2}))?"
    r"(?:\s+UTC([+-]\d{2}:\d{2}))?$"
)


def fixed_offset(spec: str) -> timezone:
    """Parse a "+HH:MM" / "-HH:MM" offset string into a timezone."""
    if spec in ("Z", "z", "+00:00", "-00:00"):
        return UTC
    m = _OFFSET_RE.match(spec.strip())
    if not m:
        raise ValueError(f"bad UTC offset {spec!r}, expected +HH:MM")
    sign = 1 if m.group(1) == "+" else -1
    delta = timedelta(hours=int(m.group(2)), minutes=int(m.group(3)))
    return timezone(sign * delta)


def normalize_timestamp(raw: str, assumed_zone: timezone) -> datetime | None:
    """Parse an export date string to a UTC instant; None when unparseable.

    Accepted: "DD.MM.YYYY HH:MM[:SS]" (optionally suffixed with an explicit
    "UTC+HH:MM" zone, which then overrides assumed_zone) and ISO-8601.
    Naive inputs are interpreted in assumed_zone.
    """
    if not isinstance(raw, str):
        return None
    text = raw.strip()
    if not text:
        return None

    m = _DOTTED_RE.match(text)
    if m:
        day, month, year, hour, minute = (int(m.group(i)) for i in range(1, 6))
        second = int(m.group(6) or 0)
        zone = assumed_zone
        if m.group(7):
            try:
                zone = fixed_offset(m.group(7))
            except ValueError:
                return None
        try:
            local = datetime(year, month, day, hour, minute, second, tzinfo=zone)
        except ValueError:
            return None
        return local.astimezone(UTC)

    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    try:
        parsed = datetime.fromisoformat(iso)
    except ValueError:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=assumed_zone)
    return parsed.astimezone(UTC).replace(microsecond=0)


def iso_z(instant: datetime) -> str:
    """Format a UTC instant as ISO-8601 with Z suffix, whole seconds."""
    return instant.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_utc(text: str, *, end_of_day: bool = False) -> datetime:
    """Parse an ISO date or datetime query parameter, UTC assumed.

    A bare date maps to 00:00:00 of that day, or 23:59:59 when end_of_day
    (so from/to date pairs cover the interval inclusively).
    """
    s = text.strip()
    s = s[:-1] + "+00:00" if s.endswith(("Z", "z")) else s
    parsed = datetime.fromisoformat(s)
    if isinstance(parsed, datetime) and (parsed.hour, parsed.minute, parsed.second) == (0, 0, 0) \
            and "T" not in s and " " not in s and end_of_day:
        parsed = parsed.replace(hour=23, minute=59, second=59)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=UTC)
    return parsed.astimezone(UTC).replace(microsecond=0)


def utc_date(instant: datetime) -> date:
    return instant.astimezone(UTC).date()


def day_start(d: date) -> datetime:
    return datetime(d.year, d.month, d.day, tzinfo=UTC)
