import { ExplorerState } from "./state.js";

// URL builders keep the API contract in one place.

export function searchUrl(state: ExplorerState, limit = 500): string {
  const params = new URLSearchParams({ q: state.query });
  if (state.from) params.set("from", state.from);
  if (state.to) params.set("to", state.to);
  if (state.channels.length) params.set("channels", state.channels.join(","));
  if (state.coalesced) params.set("coalesced", "true");
  params.set("limit", String(limit));
  return `/api/search?${params.toString()}`;
}

export function trendsUrl(state: ExplorerState): string {
  const params = new URLSearchParams({ q: state.query, granularity: state.granularity });
  if (state.from) params.set("from", state.from);
  if (state.to) params.set("to", state.to);
  if (state.channels.length) params.set("channels", state.channels.join(","));
  return `/api/trends?${params.toString()}`;
}

export function categoriesUrl(eventKey: string): string {
  return `/api/categories?event=${encodeURIComponent(eventKey)}`;
}

export function mediaUrl(hash: string, ext: string): string {
  return ext ? `/cdn/${hash}.${ext}` : `/cdn/${hash}`;
}

/**
 * At most one in-flight request wins per channel of work: begin() stamps a
 * revision, accept() is true only for the newest stamp, so responses that
 * arrive out of order are discarded instead of clobbering fresher data.
 */
export class LatestOnly {
  private revision = 0;

  begin(): number {
    return ++this.revision;
  }

  accept(revision: number): boolean {
    return revision === this.revision;
  }
}

export interface FetchResult<T> {
  ok: boolean;
  data?: T;
  error?: string;
}

export async function fetchJson<T>(url: string): Promise<FetchResult<T>> {
  try {
    const response = await fetch(url);
    const body = await response.json();
    if (!response.ok) {
      const message = body?.error?.message ?? `HTTP ${response.status}`;
      return { ok: false, error: message };
    }
    return { ok: true, data: body as T };
  } catch (err) {
    return { ok: false, error: String(err) };
  }
}
