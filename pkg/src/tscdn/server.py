"""Read-only HTTP API over an immutable (store, corpus, index) snapshot."""
from __future__ import annotations

import calendar
import json
from datetime import date, datetime
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .analytics import (TrendSeries, WeekendWindow, channel_rankings,
                        daily_average, trend_series, weekend_window)
from .corpus import EventId
from .index import (EmptyQueryError, InvalidIntervalError, QuerySpec,
                    ScoredEvent, query)
from .pipeline import Snapshot
from .scoring import adapt_categories, build_event_vector
from .timeutil import fixed_offset, iso_z, parse_iso_utc

DEFAULT_LIMIT = 200

CONTENT_TYPES = {
    "mp4": "video/mp4", "m4v": "video/mp4", "webm": "video/webm", "mov": "video/quicktime",
    "jpg": "image/jpeg", "jpeg": "image/jpeg", "png": "image/png", "gif": "image/gif",
    "webp": "image/webp", "svg": "image/svg+xml", "ico": "image/x-icon",
    "mp3": "audio/mpeg", "ogg": "audio/ogg", "oga": "audio/ogg", "m4a": "audio/mp4",
    "wav": "audio/wav", "opus": "audio/opus",
    "pdf": "application/pdf", "css": "text/css", "js": "text/javascript",
    "txt": "text/plain", "json": "application/json",
}


class ApiError(Exception):
    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _interval_json(interval: tuple[datetime, datetime | None]) -> list:
    begin, end = interval
    return [iso_z(begin), iso_z(end) if end is not None else None]


def scored_event_dict(result: ScoredEvent, snapshot: Snapshot) -> dict:
    latest = snapshot.corpus.latest(result.event)
    return {
        "channel": result.event.channel_slug,
        "id": result.event.local_id,
        "timestamp": iso_z(result.timestamp),
        "text": latest.text,
        "views": latest.views,
        "forwarded_from": latest.forwarded_from,
        "media": [{"kind": m.kind, "hash": m.hash, "ext": m.ext, "bytes": m.size}
                  for m in latest.media],
        "matched_intervals": [_interval_json(iv) for iv in result.matched_intervals],
        "tf_ief_sum": result.tf_ief_sum,
        "cosine": result.cosine,
        "repetitions": result.repetitions,
    }


def search_response_json(results: list[ScoredEvent], snapshot: Snapshot) -> str:
    """The canonical /api/search body; the API-parity contract says the HTTP
    response must be byte-equal to this serialization."""
    return canonical_json([scored_event_dict(r, snapshot) for r in results])


def trends_response_json(series: TrendSeries) -> str:
    return canonical_json({
        "query": series.keywords,
        "granularity": series.granularity,
        "interval": [iso_z(series.interval[0]), iso_z(series.interval[1])],
        "channels": {
            channel: [{"bucket": iso_z(b.start), "count": b.count,
                       "mean_score": b.mean_score} for b in buckets]
            for channel, buckets in series.channels.items()
        },
    })


def weekend_response_json(window: WeekendWindow) -> str:
    def cells(c):
        return {"wed": c.wed, "thu_fri": c.thu_fri, "sat": c.sat}
    return canonical_json({
        "months": [{"label": m.label, "start": m.start.isoformat(),
                    "end": m.end.isoformat(),
                    "channels": {c: cells(v) for c, v in m.channels.items()}}
                   for m in window.months],
        "totals": {c: cells(v) for c, v in window.totals.items()},
    })


def _parse_spec(request: Request) -> QuerySpec:
    params = request.query_params
    q = params.get("q")
    if not q:
        raise ApiError("empty_query", "q parameter is required")
    try:
        t_b = parse_iso_utc(params["from"]) if "from" in params else None
        t_e = parse_iso_utc(params["to"], end_of_day=True) if "to" in params else None
    except ValueError as exc:
        raise ApiError("bad_date", f"unparseable date: {exc}")
    if t_b is not None and t_e is not None and t_b > t_e:
        raise ApiError("invalid_interval", "from is after to")
    channels = [c for c in params.get("channels", "").split(",") if c] or None
    try:
        limit = int(params.get("limit", DEFAULT_LIMIT))
        offset = int(params.get("offset", 0))
    except ValueError as exc:
        raise ApiError("bad_parameter", str(exc))
    return QuerySpec(
        keywords=[q],
        interval=(t_b, t_e),
        channels=channels,
        limit=limit,
        offset=offset,
        coalesced=params.get("coalesced", "").lower() in ("1", "true", "yes"),
        all_terms=params.get("all_terms", "").lower() in ("1", "true", "yes"),
    )


def _month_range(token: str) -> tuple[str, date, date]:
    try:
        year_s, month_s = token.split("-")
        year, month = int(year_s), int(month_s)
        last = calendar.monthrange(year, month)[1]
        return (token, date(year, month, 1), date(year, month, last))
    except (ValueError, IndexError) as exc:
        raise ApiError("bad_month", f"months must be YYYY-MM, got {token!r}: {exc}")


def create_app(snapshot: Snapshot, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="tscdn", docs_url=None, redoc_url=None)
    zone = fixed_offset(snapshot.zone_spec)
    adaptation_cache: dict[EventId, dict[str, float]] = {}

    @app.exception_handler(ApiError)
    async def handle_api_error(_request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"code": exc.code, "message": exc.message}})

    def run_query(spec: QuerySpec) -> list[ScoredEvent]:
        try:
            return query(snapshot.index, spec)
        except EmptyQueryError as exc:
            raise ApiError("empty_query", str(exc))
        except InvalidIntervalError as exc:
            raise ApiError("invalid_interval", str(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/search")
    def api_search(request: Request):
        spec = _parse_spec(request)
        body = search_response_json(run_query(spec), snapshot)
        return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.get("/api/trends")
    def api_trends(request: Request):
        spec = _parse_spec(request)
        spec.limit = None
        granularity = request.query_params.get("granularity", "day")
        if granularity not in ("day", "week", "month"):
            raise ApiError("bad_parameter", f"unknown granularity {granularity!r}")
        try:
            series = trend_series(snapshot.index, snapshot.corpus, spec, granularity)
        except (EmptyQueryError, InvalidIntervalError) as exc:
            raise ApiError("bad_query", str(exc))
        return Response(content=trends_response_json(series).encode("utf-8"),
                        media_type="application/json")

    @app.get("/api/weekend")
    def api_weekend(request: Request):
        spec = _parse_spec(request)
        spec.limit = None
        tokens = [t for t in request.query_params.get("months", "").split(",") if t]
        if not tokens:
            raise ApiError("bad_month", "months parameter is required (YYYY-MM,...)")
        months = [_month_range(t) for t in tokens]
        try:
            window = weekend_window(snapshot.index, spec, months, zone)
        except (EmptyQueryError, InvalidIntervalError, ValueError) as exc:
            raise ApiError("bad_query", str(exc))
        return Response(content=weekend_response_json(window).encode("utf-8"),
                        media_type="application/json")

    @app.get("/api/channels")
    def api_channels():
        rows = channel_rankings(snapshot.corpus, snapshot.store)
        body = canonical_json([{
            "channel": r.channel,
            "channel_name": snapshot.corpus.channels.get(r.channel, r.channel),
            "posts": r.posts,
            "media_before": r.media_before,
            "media_after": r.media_after,
            "total_media_before": r.total_media_before,
            "total_media_after": r.total_media_after,
            "bytes_before": r.bytes_before,
            "bytes_after": r.bytes_after,
        } for r in rows])
        return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.get("/api/stats")
    def api_stats():
        body = canonical_json({
            "global": snapshot.store.stats().as_dict(),
            "archives": {archive: snapshot.store.stats(archive).as_dict()
                         for archive in sorted(snapshot.store.dictionaries)},
        })
        return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.get("/api/categories")
    def api_categories(event: str = ""):
        if "/" not in event:
            raise ApiError("bad_event", "event must be <channel>/<local_id>")
        channel, _, local_id = event.partition("/")
        event_id = EventId(channel, local_id)
        if event_id not in snapshot.corpus.events:
            raise ApiError("not_found", f"unknown event {event}", status=404)
        if event_id not in adaptation_cache:
            vector = build_event_vector(event_id, snapshot.stats)
            adaptation_cache[event_id] = adapt_categories(vector, snapshot.categories)
        body = canonical_json({"event": event, "adaptation": adaptation_cache[event_id]})
        return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.get("/api/daily_average")
    def api_daily_average(request: Request):
        spec = _parse_spec(request)
        spec.limit = None
        t_b, t_e = spec.interval
        if t_b is None or t_e is None:
            raise ApiError("bad_parameter", "from and to are required")
        averages = daily_average(snapshot.index, spec, (t_b, t_e))
        body = canonical_json({
            channel: {"matches": a.matches, "days": a.days,
                      "raw": a.raw, "rounded": a.rounded}
            for channel, a in averages.items()})
        return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.get("/cdn/{stored_name}")
    def cdn_object(stored_name: str):
        data = snapshot.store.read_object(stored_name)
        if data is None:
            raise ApiError("not_found", f"no object {stored_name}", status=404)
        ext = stored_name.rsplit(".", 1)[1] if "." in stored_name else ""
        return Response(content=data,
                        media_type=CONTENT_TYPES.get(ext, "application/octet-stream"))

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(snapshot: Snapshot, *, host: str = "127.0.0.1", port: int = 8080,
          ui_dir: Path | None = None) -> None:
    import uvicorn
    uvicorn.run(create_app(snapshot, ui_dir), host=host, port=port, log_level="info")
