// Boot layer: wires the controls to the pure renderers. All data flows
// state -> URL -> fetch -> render; stale responses are dropped by revision.

import { categoriesUrl, fetchJson, LatestOnly, searchUrl, trendsUrl } from "./api.js";
import { renderDetail, renderError, renderScatter, renderTrendStrip } from "./render.js";
import { deserializeState, ExplorerState, serializeState, statesEqual,
         validateState } from "./state.js";
import { CategoriesResponse, ChannelRow, ScoredEvent, TrendsResponse } from "./types.js";

const DEBOUNCE_MS = 250;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class Explorer {
  private state: ExplorerState = deserializeState(location.search);
  private lastResults: ScoredEvent[] = [];
  private searchGate = new LatestOnly();
  private trendsGate = new LatestOnly();
  private debounceTimer: number | undefined;
  private channelRows: ChannelRow[] = [];

  async start(): Promise<void> {
    const channels = await fetchJson<ChannelRow[]>("/api/channels");
    this.channelRows = channels.ok && channels.data ? channels.data : [];
    this.buildChannelBoxes();
    this.applyStateToControls();
    this.bindControls();
    window.addEventListener("popstate", () => {
      this.state = deserializeState(location.search);
      this.applyStateToControls();
      this.refresh(false);
    });
    this.refresh(false);
  }

  private buildChannelBoxes(): void {
    const host = el<HTMLDivElement>("channel-boxes");
    host.innerHTML = this.channelRows.map((row) =>
      `<label><input type="checkbox" data-channel="${row.channel}"/> ` +
      `${row.channel_name} <span class="muted">(${row.posts})</span></label>`).join("");
  }

  private applyStateToControls(): void {
    el<HTMLInputElement>("query").value = this.state.query;
    el<HTMLInputElement>("from").value = this.state.from ?? "";
    el<HTMLInputElement>("to").value = this.state.to ?? "";
    el<HTMLInputElement>("coalesced").checked = this.state.coalesced;
    el<HTMLSelectElement>("granularity").value = this.state.granularity;
    el<HTMLInputElement>("axis-cosine").checked = this.state.axis === "cosine";
    el<HTMLInputElement>("lanes").checked = this.state.lanes;
    document.querySelectorAll<HTMLInputElement>("#channel-boxes input").forEach((box) => {
      box.checked = this.state.channels.length === 0
        ? false
        : this.state.channels.includes(box.dataset.channel ?? "");
    });
  }

  private readControls(): ExplorerState {
    const selected = [...document
      .querySelectorAll<HTMLInputElement>("#channel-boxes input:checked")]
      .map((box) => box.dataset.channel ?? "");
    return {
      query: el<HTMLInputElement>("query").value,
      from: el<HTMLInputElement>("from").value || null,
      to: el<HTMLInputElement>("to").value || null,
      channels: selected,
      coalesced: el<HTMLInputElement>("coalesced").checked,
      granularity: el<HTMLSelectElement>("granularity").value as ExplorerState["granularity"],
      axis: el<HTMLInputElement>("axis-cosine").checked ? "cosine" : "score",
      lanes: el<HTMLInputElement>("lanes").checked,
      selected: this.state.selected,
    };
  }

  private bindControls(): void {
    const onChange = () => this.stateChanged();
    for (const id of ["query", "from", "to"]) {
      el<HTMLInputElement>(id).addEventListener("input", onChange);
    }
    for (const id of ["coalesced", "granularity", "axis-cosine", "lanes"]) {
      el<HTMLElement>(id).addEventListener("change", onChange);
    }
    el<HTMLDivElement>("channel-boxes").addEventListener("change", onChange);
    el<HTMLDivElement>("scatter").addEventListener("click", (event) => {
      const mark = (event.target as Element).closest(".mark");
      if (mark) this.selectEvent(mark.getAttribute("data-event"));
    });
  }

  private stateChanged(): void {
    const next = this.readControls();
    if (statesEqual(next, this.state)) return;
    next.selected = null;                      // a new view drops the old detail
    this.state = next;
    window.clearTimeout(this.debounceTimer);
    this.debounceTimer = window.setTimeout(() => this.refresh(true), DEBOUNCE_MS);
  }

  private pushUrl(): void {
    const serialized = serializeState(this.state);
    const target = serialized ? `?${serialized}` : location.pathname;
    if (location.search.slice(1) !== serialized) {
      history.pushState(null, "", target);
    }
  }

  private async refresh(push: boolean): Promise<void> {
    const problem = validateState(this.state);
    const banner = el<HTMLDivElement>("banner");
    if (problem) {
      banner.innerHTML = `<div class="notice">${problem}</div>`;
      return;                                  // invalid interval blocked client-side
    }
    banner.innerHTML = "";
    if (push) this.pushUrl();

    const searchRevision = this.searchGate.begin();
    const trendsRevision = this.trendsGate.begin();
    const [search, trends] = await Promise.all([
      fetchJson<ScoredEvent[]>(searchUrl(this.state)),
      fetchJson<TrendsResponse>(trendsUrl(this.state)),
    ]);

    if (this.searchGate.accept(searchRevision)) {
      if (search.ok && search.data) {
        this.lastResults = search.data;
        el<HTMLDivElement>("scatter").innerHTML = renderScatter(search.data, {
          from: this.state.from, to: this.state.to,
          axis: this.state.axis, lanes: this.state.lanes,
          selected: this.state.selected,
        });
        el<HTMLDivElement>("result-count").textContent =
          `${search.data.length} event(s)`;
      } else {
        banner.innerHTML = renderError(search.error ?? "search failed");
      }
    }
    if (this.trendsGate.accept(trendsRevision)) {
      if (trends.ok && trends.data) {
        el<HTMLDivElement>("trend-strip").innerHTML =
          renderTrendStrip(trends.data, this.state.from, this.state.to);
      } else if (!banner.innerHTML) {
        banner.innerHTML = renderError(trends.error ?? "trends failed");
      }
    }
    if (this.state.selected) this.selectEvent(this.state.selected, false);
  }

  private async selectEvent(key: string | null, push = true): Promise<void> {
    if (!key) return;
    this.state.selected = key;
    if (push) this.pushUrl();
    const result = this.lastResults.find((r) => `${r.channel}/${r.id}` === key);
    const panel = el<HTMLDivElement>("detail");
    if (!result) {
      panel.innerHTML = `<p class="muted">event ${key} not in the current result set</p>`;
      return;
    }
    panel.innerHTML = renderDetail(result, null);
    const categories = await fetchJson<CategoriesResponse>(categoriesUrl(key));
    if (categories.ok && categories.data && this.state.selected === key) {
      panel.innerHTML = renderDetail(result, categories.data);
    }
  }
}

new Explorer().start();
