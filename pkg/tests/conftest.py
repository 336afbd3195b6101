from __future__ import annotations

import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tscdn.corpus import Corpus, CyberspaceSnapshot, EventId, EventVersion

UTC = timezone.utc

PAGE_TEMPLATE = """<!DOCTYPE html>
<html>
<head>
 <meta charset="utf-8"/>
 <title>Exported Data</title>
 <link href="css/style.css" rel="stylesheet"/>
 <script src="js/script.js"></script>
</head>
<body>
 <div class="page_wrap">
  <div class="page_header">
   <div class="content"><div class="text bold">{channel_name}</div></div>
  </div>
  <div class="page_body chat_page">
   <div class="history">
    <div class="message service" id="message-1"><div class="body details">23 March 2020</div></div>
{blocks}
   </div>
  </div>
 </div>
</body>
</html>
"""

BLOCK_TEMPLATE = """    <div class="message default clearfix" id="message{mid}">
     <div class="pull_left userpic_wrap"><div class="userpic"><div class="initials">T</div></div></div>
     <div class="body">
      <div class="pull_right date details" title="{date}">{clock}</div>
      <div class="from_name">{channel_name}</div>
{extra}
      <div class="text">{text}</div>
     </div>
    </div>
"""


def message_block(mid, date, text, media=None, forwarded=None, channel_name="Test Channel"):
    extra_parts = []
    if forwarded:
        extra_parts.append(
            f'      <div class="forwarded body"><div class="from_name">{forwarded} '
            f'<span class="date details" title="{date}">original</span></div></div>')
    for path in media or []:
        extra_parts.append(
            f'      <div class="media_wrap clearfix">'
            f'<a class="media clearfix pull_left block_link media_video" href="{path}">'
            f'<div class="body"><div class="title bold">{path}</div></div></a></div>')
    clock = date.split(" ")[1][:5] if " " in date else date
    return BLOCK_TEMPLATE.format(mid=mid, date=date, clock=clock, text=text,
                                 extra="\n".join(extra_parts),
                                 channel_name=channel_name)


def export_page(blocks, channel_name="Test Channel"):
    return PAGE_TEMPLATE.format(channel_name=channel_name, blocks="".join(blocks))


def write_export(root: Path, pages: dict[str, str], files: dict[str, bytes] | None = None):
    """Materialize an export directory: HTML pages plus media/css/js files."""
    root.mkdir(parents=True, exist_ok=True)
    for name, html in pages.items():
        path = root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(html, encoding="utf-8")
    for name, data in (files or {}).items():
        path = root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return root


@pytest.fixture
def export_builder(tmp_path):
    def build(name="export", pages=None, files=None):
        return write_export(tmp_path / name, pages or {}, files)
    return build


SHARED_ASSETS = {
    "css/style.css": b"body { margin: 0 }",
    "js/script.js": b"void 0;",
}


def build_sample_cdn(tmp_path) -> Path:
    """Two channels ingested end-to-end into one CDN, index persisted."""
    from tscdn.pipeline import build_snapshot_index, ingest_export

    fouri_pages = {"messages.html": export_page([
        message_block(1, "01.04.2020 08:15", "سیل در شیراز جاری شد",
                      media=["photos/pic.jpg"]),
        message_block(2, "02.04.2020 10:30", "گزارش ویدیویی از سیل",
                      media=["video_files/7.mp4"]),
        message_block(3, "05.04.2020 18:00", "قیمت نفت امروز کاهش یافت"),
    ], channel_name="Khabare Test")}
    fouri_files = dict(SHARED_ASSETS)
    fouri_files["photos/pic.jpg"] = b"jpegbytes-pic"
    fouri_files["video_files/7.mp4"] = b"mp4bytes-flood-video"
    export1 = write_export(tmp_path / "exp_fouri", fouri_pages, fouri_files)

    rasmi_pages = {"messages.html": export_page([
        message_block(1, "02.04.2020 09:00", "سیل در استان فارس", media=["video_files/14.mp4"]),
        message_block(2, "09.04.2020 11:00", "واکسن آنفولانزا توزیع شد"),
    ], channel_name="Akhbare Test")}
    rasmi_files = dict(SHARED_ASSETS)
    rasmi_files["video_files/14.mp4"] = b"mp4bytes-flood-video"   # dup of 7.mp4
    export2 = write_export(tmp_path / "exp_rasmi", rasmi_pages, rasmi_files)

    cdn = tmp_path / "cdn"
    ingest_export(export1, "fouri", cdn, crawl_time=ts(2020, 9, 21),
                  archive_id="fouri@1")
    ingest_export(export2, "rasmi", cdn, crawl_time=ts(2020, 9, 21),
                  archive_id="rasmi@1")
    build_snapshot_index(cdn)
    return cdn


@pytest.fixture
def sample_cdn(tmp_path):
    return build_sample_cdn(tmp_path)


def ts(year=2020, month=3, day=23, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=UTC)


def make_event(corpus: Corpus, channel: str, local_id: str,
               versions: list[tuple[datetime, str]], views=None):
    """Insert an event chain directly (test corpora bypass ingestion)."""
    event = EventId(channel, local_id)
    corpus.channels.setdefault(channel, channel)
    corpus.events[event] = [EventVersion(event, stamp, text, [], views, None)
                            for stamp, text in versions]
    return event


def random_posting_list(rng: random.Random):
    """One-term posting list with runs of adjacent intervals and few distinct
    score levels (so equal-score runs actually appear); returns the scorer map."""
    from tscdn.index import PostingEntry, PostingList

    base = ts()
    entries = []
    scores = {}
    for event_n in range(rng.randint(1, 3)):
        local = str(event_n)
        hour = rng.randint(0, 3)
        for _ in range(rng.randint(1, 8)):
            begin, end = hour, hour + rng.randint(1, 3)
            e = PostingEntry(EventId("c", local), base + timedelta(hours=begin),
                             base + timedelta(hours=end), rng.randint(1, 5), (0,))
            entries.append(e)
            scores[(local, e.begin)] = rng.choice([1.0, 1.0, 1.02, 2.0])
            hour = end + (0 if rng.random() < 0.7 else rng.randint(1, 2))
        if rng.random() < 0.3:
            e = PostingEntry(EventId("c", local), base + timedelta(hours=hour),
                             None, 1, (0,))
            entries.append(e)
            scores[(local, e.begin)] = rng.choice([1.0, 2.0])
    plist = PostingList("t", entries)
    plist.sort()
    return plist, scores


def interval_union(entries):
    """Merged coverage spans per event (adjacent intervals fused)."""
    spans = {}
    for e in sorted(entries, key=lambda e: (e.event, e.begin)):
        merged = spans.setdefault(e.event.local_id, [])
        if merged and merged[-1][1] is not None and merged[-1][1] == e.begin:
            merged[-1][1] = e.end
        else:
            merged.append([e.begin, e.end])
    return {k: [tuple(s) for s in v] for k, v in spans.items()}


def synth_corpus(seed=0, n_events=50, n_channels=2, vocab_size=30,
                 multi_version_rate=0.2, start=None, span_days=120) -> Corpus:
    """Random ASCII corpus with version chains; deterministic per seed."""
    rng = random.Random(seed)
    start = start or ts()
    vocab = [f"w{i}" for i in range(vocab_size)]
    corpus = Corpus()
    channels = [f"ch{c}" for c in range(n_channels)]
    for ch in channels:
        corpus.channels[ch] = ch.upper()
    latest = start
    for i in range(n_events):
        channel = rng.choice(channels)
        t1 = start + timedelta(minutes=rng.randrange(span_days * 24 * 60))
        text1 = " ".join(rng.choices(vocab, k=rng.randint(1, 12)))
        versions = [(t1, text1)]
        while rng.random() < multi_version_rate:
            prev_t, prev_text = versions[-1]
            t_next = prev_t + timedelta(minutes=rng.randint(1, 5000))
            mutated = " ".join(rng.choices(vocab, k=rng.randint(1, 12)))
            if mutated == prev_text:
                mutated = prev_text + " w0"
            versions.append((t_next, mutated))
        make_event(corpus, channel, str(i), versions)
        latest = max(latest, versions[-1][0])
    corpus.snapshots.append(
        CyberspaceSnapshot(channels[0], latest + timedelta(days=1), "synthetic"))
    return corpus
