// Thin client for the monitoring API. The service is the single source of
// truth; nothing is aggregated or recomputed client-side.

import { QueryFormState } from "./state.js";

export interface SeriesPoint {
  date: string;
  absolute: number;
  relative: number;
}

export interface TermSeries {
  term: string;
  points: SeriesPoint[];
}

export interface TimeSeriesResponse {
  query: Record<string, unknown>;
  period: { start: string; end: string };
  series: TermSeries[];
}

export interface Meta {
  parties: string[];
  period: { start: string; end: string };
  scopes: string[];
  normalize: string[];
  posts: number;
}

function queryParams(state: QueryFormState): string {
  const params = new URLSearchParams();
  params.set("terms", state.terms.join(","));
  if (state.party) params.set("party", state.party);
  params.set("normalize", state.normalize);
  params.set("scope", state.scope);
  return params.toString();
}

export function timeseriesUrl(baseUrl: string, state: QueryFormState): string {
  return `${baseUrl}/api/v1/timeseries?${queryParams(state)}`;
}

export function csvUrl(baseUrl: string, state: QueryFormState): string {
  return `${baseUrl}/api/v1/timeseries.csv?${queryParams(state)}`;
}

export async function fetchTimeseries(
  baseUrl: string,
  state: QueryFormState,
): Promise<TimeSeriesResponse> {
  const resp = await fetch(timeseriesUrl(baseUrl, state));
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body: keep the status code
    }
    throw new Error(`query failed: ${detail}`);
  }
  return (await resp.json()) as TimeSeriesResponse;
}

export async function fetchMeta(baseUrl: string): Promise<Meta> {
  const resp = await fetch(`${baseUrl}/api/v1/meta`);
  if (!resp.ok) throw new Error(`meta failed: ${resp.status}`);
  return (await resp.json()) as Meta;
}
