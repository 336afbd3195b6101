// Payload shapes of the query API. Every number shown in the UI comes from
// one of these fields; the client never recomputes scores or filters.

export interface MediaRef {
  kind: string;
  hash: string;
  ext: string;
  bytes: number;
}

export interface ScoredEvent {
  channel: string;
  id: string;
  timestamp: string;                       // ISO-8601 Z
  text: string;
  views: number | null;
  forwarded_from: string | null;
  media: MediaRef[];
  matched_intervals: [string, string | null][];
  tf_ief_sum: number;
  cosine: number;
  repetitions: Record<string, number>;
}

export interface TrendBucket {
  bucket: string;
  count: number;
  mean_score: number;
}

export interface TrendsResponse {
  query: string[];
  granularity: string;
  interval: [string, string];
  channels: Record<string, TrendBucket[]>;
}

export interface ChannelRow {
  channel: string;
  channel_name: string;
  posts: number;
  media_before: Record<string, number>;
  media_after: Record<string, number>;
  total_media_before: number;
  total_media_after: number;
  bytes_before: number;
  bytes_after: number;
}

export interface CategoriesResponse {
  event: string;
  adaptation: Record<string, number>;
}

export interface ApiError {
  error: { code: string; message: string };
}
