// Pure view builders: (payloads, options) -> markup strings. No fetching, no
// state, no recomputation of scores — every plotted number is an API field.

import { CategoriesResponse, ScoredEvent, TrendsResponse } from "./types.js";
import { ScoreAxis } from "./state.js";
import { mediaUrl } from "./api.js";

export const SCATTER = { width: 900, height: 360, left: 55, right: 15, top: 12, bottom: 30 };
export const STRIP = { width: 900, height: 120, left: 55, right: 15, top: 6, bottom: 22 };

const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed",
                 "#0891b2", "#be185d", "#4d7c0f"];

export function channelColor(channel: string, order: string[]): string {
  const index = order.indexOf(channel);
  return PALETTE[(index < 0 ? 0 : index) % PALETTE.length];
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export interface TimeDomain {
  t0: number;
  t1: number;
}

export function timeDomain(results: ScoredEvent[],
                           from: string | null, to: string | null): TimeDomain {
  let t0 = from ? Date.parse(from) : NaN;
  let t1 = to ? Date.parse(to) : NaN;
  if (Number.isNaN(t0) || Number.isNaN(t1)) {
    const stamps = results.map((r) => Date.parse(r.timestamp));
    if (Number.isNaN(t0)) t0 = stamps.length ? Math.min(...stamps) : Date.parse("2020-01-01");
    if (Number.isNaN(t1)) t1 = stamps.length ? Math.max(...stamps) : Date.parse("2020-01-02");
  }
  if (t1 <= t0) t1 = t0 + 24 * 3600 * 1000;
  return { t0, t1 };
}

export function xFor(tsMs: number, domain: TimeDomain,
                     box = SCATTER): number {
  const inner = box.width - box.left - box.right;
  return box.left + ((tsMs - domain.t0) / (domain.t1 - domain.t0)) * inner;
}

export function yFor(value: number, yMax: number, box = SCATTER,
                     lane?: { index: number; count: number }): number {
  const innerTop = box.top;
  const innerHeight = box.height - box.top - box.bottom;
  if (!lane || lane.count <= 1) {
    return innerTop + (1 - value / yMax) * innerHeight;
  }
  const laneHeight = innerHeight / lane.count;
  const laneTop = innerTop + lane.index * laneHeight;
  return laneTop + (1 - value / yMax) * (laneHeight - 4) + 2;
}

export function axisValue(result: ScoredEvent, axis: ScoreAxis): number {
  return axis === "cosine" ? result.cosine : result.tf_ief_sum;
}

function fmt(n: number): string {
  return n.toFixed(2);
}

function isoDay(ms: number): string {
  return new Date(ms).toISOString().slice(0, 10);
}

function xAxisSvg(domain: TimeDomain, box: typeof SCATTER): string {
  const baseline = box.height - box.bottom;
  const parts = [
    `<line class="axis" x1="${box.left}" y1="${fmt(baseline)}" ` +
    `x2="${box.width - box.right}" y2="${fmt(baseline)}"/>`,
  ];
  for (let i = 0; i <= 4; i++) {
    const ms = domain.t0 + ((domain.t1 - domain.t0) * i) / 4;
    const x = xFor(ms, domain, box);
    parts.push(`<line class="tick" x1="${fmt(x)}" y1="${fmt(baseline)}" ` +
               `x2="${fmt(x)}" y2="${fmt(baseline + 4)}"/>`);
    parts.push(`<text class="tick-label" x="${fmt(x)}" y="${fmt(baseline + 16)}" ` +
               `text-anchor="middle">${isoDay(ms)}</text>`);
  }
  return parts.join("");
}

function yAxisSvg(yMax: number, label: string, box: typeof SCATTER): string {
  const parts = [
    `<line class="axis" x1="${box.left}" y1="${box.top}" ` +
    `x2="${box.left}" y2="${box.height - box.bottom}"/>`,
    `<text class="axis-label" x="12" y="${box.top + 10}">${escapeHtml(label)}</text>`,
  ];
  for (let i = 0; i <= 3; i++) {
    const value = (yMax * i) / 3;
    const y = yFor(value, yMax, box);
    parts.push(`<text class="tick-label" x="${box.left - 6}" y="${fmt(y + 3)}" ` +
               `text-anchor="end">${value.toFixed(2)}</text>`);
  }
  return parts.join("");
}

export interface ScatterOptions {
  from: string | null;
  to: string | null;
  axis: ScoreAxis;
  lanes: boolean;
  selected?: string | null;
}

/** One mark per scored event at (timestamp, score), colored by channel. */
export function renderScatter(results: ScoredEvent[], opts: ScatterOptions): string {
  const box = SCATTER;
  const domain = timeDomain(results, opts.from, opts.to);
  const channels = [...new Set(results.map((r) => r.channel))].sort();
  const yMax = Math.max(1e-9, ...results.map((r) => axisValue(r, opts.axis)));
  const axisLabel = opts.axis === "cosine" ? "cosine" : "TF-IEF score";

  const parts = [
    `<svg class="scatter" viewBox="0 0 ${box.width} ${box.height}" ` +
    `width="${box.width}" height="${box.height}" xmlns="http://www.w3.org/2000/svg">`,
    xAxisSvg(domain, box),
    yAxisSvg(yMax, axisLabel, box),
  ];

  channels.forEach((channel, i) => {
    const color = channelColor(channel, channels);
    parts.push(`<g class="legend-entry"><circle cx="${box.left + 10 + i * 150}" ` +
               `cy="${box.top}" r="5" fill="${color}"/>` +
               `<text class="legend-label" x="${box.left + 20 + i * 150}" ` +
               `y="${box.top + 4}">${escapeHtml(channel)}</text></g>`);
  });

  if (!results.length) {
    parts.push(`<text class="empty-note" x="${box.width / 2}" ` +
               `y="${box.height / 2}" text-anchor="middle">` +
               `no events match — adjust the phrase or widen the interval</text>`);
  }

  for (const result of results) {
    const key = `${result.channel}/${result.id}`;
    const value = axisValue(result, opts.axis);
    const lane = opts.lanes
      ? { index: channels.indexOf(result.channel), count: channels.length }
      : undefined;
    const cx = xFor(Date.parse(result.timestamp), domain, box);
    const cy = yFor(value, yMax, box, lane);
    const snippet = result.text.length > 120 ? result.text.slice(0, 117) + "..." : result.text;
    const selected = opts.selected === key ? " selected" : "";
    parts.push(
      `<circle class="mark${selected}" data-event="${escapeHtml(key)}" ` +
      `data-ts="${result.timestamp}" data-score="${value}" ` +
      `cx="${fmt(cx)}" cy="${fmt(cy)}" r="4.5" ` +
      `fill="${channelColor(result.channel, channels)}">` +
      `<title>${escapeHtml(`${result.channel} · ${result.timestamp}\n${snippet}\n` +
        `score ${result.tf_ief_sum.toFixed(4)} · cosine ${result.cosine.toFixed(4)}`)}` +
      `</title></circle>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Per-channel bucket counts as grouped bars sharing the scatter's time axis. */
export function renderTrendStrip(trends: TrendsResponse,
                                 from: string | null, to: string | null): string {
  const box = STRIP;
  const channels = Object.keys(trends.channels).sort();
  const buckets = channels.flatMap((c) => trends.channels[c]);
  const domain = timeDomain([], from ?? trends.interval[0], to ?? trends.interval[1]);
  const maxCount = Math.max(1, ...buckets.map((b) => b.count));
  const baseline = box.height - box.bottom;

  const parts = [
    `<svg class="trend-strip" viewBox="0 0 ${box.width} ${box.height}" ` +
    `width="${box.width}" height="${box.height}" xmlns="http://www.w3.org/2000/svg">`,
    `<line class="axis" x1="${box.left}" y1="${baseline}" ` +
    `x2="${box.width - box.right}" y2="${baseline}"/>`,
    `<text class="axis-label" x="12" y="${box.top + 10}">events/${escapeHtml(trends.granularity)}</text>`,
  ];
  const groupWidth = Math.max(2, (box.width - box.left - box.right) /
    Math.max(1, trends.channels[channels[0]]?.length ?? 1) - 2);
  const barWidth = Math.max(1.5, Math.min(10, groupWidth / Math.max(1, channels.length)));

  channels.forEach((channel, ci) => {
    const color = channelColor(channel, channels);
    for (const bucket of trends.channels[channel]) {
      if (!bucket.count) continue;     // flat baseline for empty buckets
      const x = xFor(Date.parse(bucket.bucket), domain, box) + ci * barWidth;
      const height = (bucket.count / maxCount) * (baseline - box.top);
      parts.push(
        `<rect class="bar" data-bucket="${bucket.bucket}" data-channel="${escapeHtml(channel)}" ` +
        `data-count="${bucket.count}" x="${fmt(x)}" y="${fmt(baseline - height)}" ` +
        `width="${fmt(barWidth)}" height="${fmt(height)}" fill="${color}">` +
        `<title>${escapeHtml(`${channel} · ${bucket.bucket}: ${bucket.count} events`)}</title></rect>`);
    }
  });
  parts.push("</svg>");
  return parts.join("");
}

/** Detail panel for a clicked mark: full text, media, scores, categories. */
export function renderDetail(result: ScoredEvent,
                             categories: CategoriesResponse | null): string {
  const reps = Object.entries(result.repetitions)
    .map(([term, count]) => `${escapeHtml(term)}&times;${count}`)
    .join(", ");
  const media = result.media.map((m) => {
    const url = mediaUrl(m.hash, m.ext);
    if (m.kind === "image") {
      return `<a href="${url}" target="_blank"><img class="thumb" src="${url}" alt="image"/></a>`;
    }
    if (m.kind === "video") {
      return `<video class="thumb" src="${url}" controls preload="metadata"></video>`;
    }
    return `<a class="media-link" href="${url}" target="_blank">${m.kind} (${m.bytes} bytes)</a>`;
  }).join(" ");
  const adaptation = categories
    ? `<table class="categories">` + Object.entries(categories.adaptation)
        .sort((a, b) => b[1] - a[1])
        .map(([name, sim]) =>
          `<tr><td>${escapeHtml(name)}</td><td>${sim.toFixed(4)}</td></tr>`)
        .join("") + `</table>`
    : `<p class="muted">loading category adaptation…</p>`;
  const intervals = result.matched_intervals
    .map(([b, e]) => `[${b}, ${e ?? "now"})`).join(" ");
  return [
    `<h3>${escapeHtml(result.channel)}/${escapeHtml(result.id)}</h3>`,
    `<p class="stamp">${result.timestamp}` +
    (result.views !== null ? ` · ${result.views} views` : "") +
    (result.forwarded_from ? ` · forwarded from ${escapeHtml(result.forwarded_from)}` : "") +
    `</p>`,
    `<p class="event-text">${escapeHtml(result.text)}</p>`,
    media ? `<div class="media-row">${media}</div>` : "",
    `<p class="scores">TF-IEF sum ${result.tf_ief_sum.toFixed(4)} · ` +
    `cosine ${result.cosine.toFixed(4)}<br/>terms: ${reps}<br/>` +
    `matched: ${escapeHtml(intervals)}</p>`,
    `<h4>category adaptation</h4>`,
    adaptation,
  ].join("");
}

export function renderError(message: string): string {
  return `<div class="error-banner">API error: ${escapeHtml(message)}</div>`;
}
