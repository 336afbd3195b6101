import { describe, expect, it } from "vitest";
import { DEFAULT_STATE, deserializeState, ExplorerState, serializeState,
         validateState } from "../src/state.js";

// deterministic LCG so the 50 random states are reproducible
function lcg(seed: number): () => number {
  let value = seed >>> 0;
  return () => {
    value = (value * 1664525 + 1013904223) >>> 0;
    return value / 2 ** 32;
  };
}

const WORDS = ["سیل", "زلزله", "covid", "vaccine", "نفت", "quarantine", "fire"];
const CHANNELS = ["fouri", "rasmi", "rouze", "akhbar"];

function randomState(rand: () => number): ExplorerState {
  const pick = <T>(xs: T[]) => xs[Math.floor(rand() * xs.length)];
  const day = () => `2020-0${1 + Math.floor(rand() * 9)}-1${Math.floor(rand() * 9)}`;
  const from = rand() < 0.7 ? day() : null;
  let to = rand() < 0.7 ? day() : null;
  if (from && to && to < from) [to] = [from];   // keep valid; validation tested apart
  const channelCount = Math.floor(rand() * 3);
  const channels = [...new Set(Array.from({ length: channelCount },
    () => pick(CHANNELS)))];
  return {
    query: rand() < 0.9 ? `${pick(WORDS)}${rand() < 0.3 ? " " + pick(WORDS) : ""}` : "",
    from,
    to,
    channels,
    coalesced: rand() < 0.3,
    granularity: pick(["day", "week", "month"] as const),
    axis: rand() < 0.3 ? "cosine" : "score",
    lanes: rand() < 0.3,
    selected: rand() < 0.3 ? `${pick(CHANNELS)}/${Math.floor(rand() * 50)}` : null,
  };
}

describe("URL state round-trip", () => {
  it("deserialize(serialize(s)) == s for 50 random states", () => {
    const rand = lcg(20200323);
    for (let i = 0; i < 50; i++) {
      const state = randomState(rand);
      const roundTripped = deserializeState(serializeState(state));
      expect(roundTripped).toEqual(state);
    }
  });

  it("serialize(deserialize(url)) == url for canonical urls", () => {
    const rand = lcg(99);
    for (let i = 0; i < 50; i++) {
      const url = serializeState(randomState(rand));
      expect(serializeState(deserializeState(url))).toBe(url);
    }
  });

  it("empty query string gives the default state", () => {
    expect(deserializeState("")).toEqual(DEFAULT_STATE);
    expect(serializeState(DEFAULT_STATE)).toBe("");
  });

  it("handles a leading question mark and Persian text", () => {
    const state = { ...DEFAULT_STATE, query: "سیل تهران" };
    const url = serializeState(state);
    expect(deserializeState("?" + url)).toEqual(state);
  });

  it("unknown enum values fall back to defaults", () => {
    const state = deserializeState("q=x&g=hour&axis=banana");
    expect(state.granularity).toBe("day");
    expect(state.axis).toBe("score");
  });
});

describe("state validation", () => {
  it("blocks an inverted interval client-side", () => {
    const bad = { ...DEFAULT_STATE, query: "x", from: "2020-05-01", to: "2020-04-01" };
    expect(validateState(bad)).toMatch(/after/);
  });

  it("accepts a proper interval and requires a query", () => {
    expect(validateState({ ...DEFAULT_STATE, query: "x", from: "2020-04-01",
                           to: "2020-05-01" })).toBeNull();
    expect(validateState(DEFAULT_STATE)).toMatch(/query/);
  });
});
