import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { axisValue, renderDetail, renderScatter, renderTrendStrip, SCATTER,
         timeDomain, xFor, yFor } from "../src/render.js";
import { ScoredEvent, TrendsResponse } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const searchFixture: ScoredEvent[] = JSON.parse(
  readFileSync(join(here, "fixtures", "search.json"), "utf-8"));
const trendsFixture: TrendsResponse = JSON.parse(
  readFileSync(join(here, "fixtures", "trends.json"), "utf-8"));

const OPTS = { from: "2020-04-01", to: "2020-04-30", axis: "score" as const,
               lanes: false };

describe("scatter", () => {
  it("matches the stored snapshot for the captured fixture payload", () => {
    expect(renderScatter(searchFixture, OPTS)).toMatchSnapshot();
  });

  it("renders one mark per event and one legend entry per channel", () => {
    // the fixture holds 3 events across 2 channels
    const svg = renderScatter(searchFixture, OPTS);
    expect(svg.match(/class="mark/g)).toHaveLength(3);
    expect(svg.match(/class="legend-entry"/g)).toHaveLength(2);
  });

  it("places marks exactly at (timestamp, score) through the scales", () => {
    const svg = renderScatter(searchFixture, OPTS);
    const domain = timeDomain(searchFixture, OPTS.from, OPTS.to);
    const yMax = Math.max(...searchFixture.map((r) => r.tf_ief_sum));
    const marks = [...svg.matchAll(
      /data-ts="([^"]+)" data-score="([^"]+)" cx="([^"]+)" cy="([^"]+)"/g)];
    expect(marks).toHaveLength(searchFixture.length);
    const byTs = new Map(searchFixture.map((r) => [r.timestamp, r]));
    for (const [, ts, score, cx, cy] of marks) {
      const event = byTs.get(ts)!;
      expect(event).toBeDefined();
      expect(Number(score)).toBeCloseTo(event.tf_ief_sum, 12);
      expect(Number(cx)).toBeCloseTo(xFor(Date.parse(ts), domain), 2);
      expect(Number(cy)).toBeCloseTo(yFor(event.tf_ief_sum, yMax), 2);
    }
  });

  it("empty result set still draws axes plus an empty-state message", () => {
    const svg = renderScatter([], OPTS);
    expect(svg).toContain("no events match");
    expect(svg.match(/class="axis"/g)!.length).toBeGreaterThanOrEqual(2);
    expect(svg).not.toContain('class="mark');
  });

  it("cosine axis toggle plots the cosine field", () => {
    const svg = renderScatter(searchFixture, { ...OPTS, axis: "cosine" });
    const scores = [...svg.matchAll(/data-score="([^"]+)"/g)].map((m) => Number(m[1]));
    expect(scores.sort()).toEqual(
      searchFixture.map((r) => r.cosine).sort());
    expect(svg).toContain(">cosine</text>");
  });

  it("lane offset keeps every mark inside its channel band", () => {
    const svg = renderScatter(searchFixture, { ...OPTS, lanes: true });
    const channels = [...new Set(searchFixture.map((r) => r.channel))].sort();
    const innerHeight = SCATTER.height - SCATTER.top - SCATTER.bottom;
    const laneHeight = innerHeight / channels.length;
    const marks = [...svg.matchAll(
      /data-event="([^"]+)\/[^"]*".*?cy="([^"]+)"/g)];
    for (const [, channel, cy] of marks) {
      const lane = channels.indexOf(channel);
      const top = SCATTER.top + lane * laneHeight;
      expect(Number(cy)).toBeGreaterThanOrEqual(top);
      expect(Number(cy)).toBeLessThanOrEqual(top + laneHeight);
    }
  });

  it("marks the selected event", () => {
    const key = `${searchFixture[0].channel}/${searchFixture[0].id}`;
    const svg = renderScatter(searchFixture, { ...OPTS, selected: key });
    expect(svg).toContain('class="mark selected"');
  });

  it("escapes markup in event text", () => {
    const hostile: ScoredEvent = {
      ...searchFixture[0],
      text: '<script>alert("x")</script>',
    };
    const svg = renderScatter([hostile], OPTS);
    expect(svg).not.toContain("<script>");
    expect(svg).toContain("&lt;script&gt;");
  });
});

describe("trend strip", () => {
  it("matches the stored snapshot for the captured fixture payload", () => {
    expect(renderTrendStrip(trendsFixture, "2020-04-01", "2020-04-10"))
      .toMatchSnapshot();
  });

  it("renders one bar per non-zero bucket with the payload count", () => {
    const svg = renderTrendStrip(trendsFixture, null, null);
    const bars = [...svg.matchAll(/data-channel="([^"]+)" data-count="(\d+)"/g)];
    const nonZero = Object.entries(trendsFixture.channels).flatMap(([c, buckets]) =>
      buckets.filter((b) => b.count > 0).map((b) => [c, String(b.count)]));
    expect(bars.map((m) => [m[1], m[2]]).sort()).toEqual(nonZero.sort());
  });

  it("all-zero series renders a flat strip (baseline, no bars)", () => {
    const zero: TrendsResponse = {
      query: ["x"], granularity: "day",
      interval: ["2020-04-01T00:00:00Z", "2020-04-03T23:59:59Z"],
      channels: { a: [
        { bucket: "2020-04-01T00:00:00Z", count: 0, mean_score: 0 },
        { bucket: "2020-04-02T00:00:00Z", count: 0, mean_score: 0 },
      ] },
    };
    const svg = renderTrendStrip(zero, null, null);
    expect(svg).not.toContain("<rect");
    expect(svg).toContain('class="axis"');
  });

  it("bar heights are proportional to planted counts", () => {
    const planted: TrendsResponse = {
      query: ["p"], granularity: "day",
      interval: ["2020-04-01T00:00:00Z", "2020-04-04T23:59:59Z"],
      channels: { a: [
        { bucket: "2020-04-01T00:00:00Z", count: 2, mean_score: 1 },
        { bucket: "2020-04-02T00:00:00Z", count: 4, mean_score: 1 },
        { bucket: "2020-04-03T00:00:00Z", count: 1, mean_score: 1 },
      ] },
    };
    const svg = renderTrendStrip(planted, null, null);
    const heights = [...svg.matchAll(/data-count="(\d+)"[^/]*? height="([^"]+)"/g)]
      .map((m) => [Number(m[1]), Number(m[2])] as const);
    expect(heights).toHaveLength(3);
    const unit = heights.find(([count]) => count === 1)![1];
    for (const [count, height] of heights) {
      expect(height).toBeCloseTo(unit * count, 1);
    }
  });

  it("labels the strip with the response granularity", () => {
    const svg = renderTrendStrip({ ...trendsFixture, granularity: "month" },
                                 null, null);
    expect(svg).toContain("events/month");
  });
});

describe("detail panel", () => {
  it("shows every number straight from the payload", () => {
    const result = searchFixture.find((r) => r.media.length > 0) ?? searchFixture[0];
    const html = renderDetail(result, {
      event: `${result.channel}/${result.id}`,
      adaptation: { Flood: 0.5, Vaccine: 0.0 },
    });
    expect(html).toContain(result.tf_ief_sum.toFixed(4));
    expect(html).toContain(result.cosine.toFixed(4));
    expect(html).toContain("Flood");
    for (const media of result.media) {
      expect(html).toContain(`/cdn/${media.hash}.${media.ext}`);
    }
  });

  it("axisValue picks the toggled field", () => {
    const r = searchFixture[0];
    expect(axisValue(r, "score")).toBe(r.tf_ief_sum);
    expect(axisValue(r, "cosine")).toBe(r.cosine);
  });
});
