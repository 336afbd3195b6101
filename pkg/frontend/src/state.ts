// Explorer state <-> URL query string. The whole session is shareable: the
// address bar always holds the canonical serialization of the current state.

export type Granularity = "day" | "week" | "month";
export type ScoreAxis = "score" | "cosine";

export interface ExplorerState {
  query: string;
  from: string | null;          // ISO date or datetime, as entered
  to: string | null;
  channels: string[];           // selected slugs; empty means all
  coalesced: boolean;
  granularity: Granularity;
  axis: ScoreAxis;              // y axis: tf_ief_sum ("score") or cosine
  lanes: boolean;               // per-channel lane offset toggle
  selected: string | null;      // "<channel>/<id>" for the detail panel
}

export const DEFAULT_STATE: ExplorerState = {
  query: "",
  from: null,
  to: null,
  channels: [],
  coalesced: false,
  granularity: "day",
  axis: "score",
  lanes: false,
  selected: null,
};

const GRANULARITIES: Granularity[] = ["day", "week", "month"];

export function serializeState(state: ExplorerState): string {
  // canonical form: parameters in fixed order, defaults omitted
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.from) params.set("from", state.from);
  if (state.to) params.set("to", state.to);
  if (state.channels.length) params.set("channels", state.channels.join(","));
  if (state.coalesced) params.set("coalesced", "1");
  if (state.granularity !== "day") params.set("g", state.granularity);
  if (state.axis !== "score") params.set("axis", state.axis);
  if (state.lanes) params.set("lanes", "1");
  if (state.selected) params.set("sel", state.selected);
  return params.toString();
}

export function deserializeState(search: string): ExplorerState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const g = params.get("g");
  const axis = params.get("axis");
  return {
    query: params.get("q") ?? "",
    from: params.get("from"),
    to: params.get("to"),
    channels: (params.get("channels") ?? "").split(",").filter((c) => c),
    coalesced: params.get("coalesced") === "1",
    granularity: GRANULARITIES.includes(g as Granularity) ? (g as Granularity) : "day",
    axis: axis === "cosine" ? "cosine" : "score",
    lanes: params.get("lanes") === "1",
    selected: params.get("sel"),
  };
}

/** Human-readable reason the state cannot be queried, or null when valid. */
export function validateState(state: ExplorerState): string | null {
  if (!state.query.trim()) return "enter a query phrase";
  if (state.from && state.to && state.from > state.to) {
    return "interval start is after its end";
  }
  return null;
}

export function statesEqual(a: ExplorerState, b: ExplorerState): boolean {
  return serializeState(a) === serializeState(b);
}
