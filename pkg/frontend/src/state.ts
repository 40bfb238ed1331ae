// Query form state, kept in lockstep with the browser URL so every view
// is a shareable deep link.

export type Normalize = "absolute" | "relative";
export type Scope = "partisan" | "all";

export interface QueryFormState {
  terms: string[];
  party: string | null;
  normalize: Normalize;
  scope: Scope;
  logScale: boolean;
}

export const DEFAULT_STATE: QueryFormState = {
  terms: [],
  party: null,
  normalize: "absolute",
  scope: "partisan",
  logScale: false,
};

export function parseTerms(input: string): string[] {
  return input
    .split(",")
    .map((t) => t.trim().toLowerCase())
    .filter((t) => t.length > 0);
}

export function canSubmit(state: QueryFormState): boolean {
  return state.terms.length > 0;
}

export function parseState(search: string): QueryFormState {
  const params = new URLSearchParams(search);
  const normalize = params.get("normalize");
  const scope = params.get("scope");
  return {
    terms: parseTerms(params.get("terms") ?? ""),
    party: params.get("party") || null,
    normalize: normalize === "relative" ? "relative" : "absolute",
    scope: scope === "all" ? "all" : "partisan",
    logScale: params.get("log") === "1",
  };
}

export function serializeState(state: QueryFormState): string {
  const params = new URLSearchParams();
  if (state.terms.length > 0) params.set("terms", state.terms.join(","));
  if (state.party) params.set("party", state.party);
  if (state.normalize !== "absolute") params.set("normalize", state.normalize);
  if (state.scope !== "partisan") params.set("scope", state.scope);
  if (state.logScale) params.set("log", "1");
  const encoded = params.toString();
  return encoded ? `?${encoded}` : "";
}

export function statesEqual(a: QueryFormState, b: QueryFormState): boolean {
  return serializeState(a) === serializeState(b);
}
