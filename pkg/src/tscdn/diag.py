"""Structured warning records (JSON lines on a diagnostics channel)."""
from __future__ import annotations

import json
from typing import Any, IO


class Diagnostics:
    """Collects structured warning records; optionally tees them to a stream."""

    def __init__(self, stream: IO[str] | None = None):
        self.records: list[dict[str, Any]] = []
        self._stream = stream

    def warn(self, code: str, **fields: Any) -> None:
        record = {"level": "warning", "code": code, **fields}
        self.records.append(record)
        if self._stream is not None:
            self._stream.write(json.dumps(record, ensure_ascii=False) + "\n")

    def count(self, code: str | None = None) -> int:
        if code is None:
            return len(self.records)
        return sum(1 for r in self.records if r["code"] == code)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in self.records)
