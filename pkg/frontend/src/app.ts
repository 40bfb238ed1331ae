// Form wiring and query lifecycle. The URL is the source of truth: every
// submit pushes its query string, every navigation re-renders from it, so
// any rendered view can be shared as a link.

import {
  DEFAULT_STATE,
  QueryFormState,
  canSubmit,
  parseState,
  parseTerms,
  serializeState,
  statesEqual,
} from "./state.js";
import { TimeSeriesResponse, csvUrl, fetchMeta, fetchTimeseries } from "./api.js";
import { renderChart } from "./chart.js";
import { renderTable } from "./table.js";

type FetchTimeseries = (baseUrl: string, state: QueryFormState) => Promise<TimeSeriesResponse>;

export class MonitoringApp {
  private readonly doc: Document;
  private sequence = 0;
  private pending: Promise<void> = Promise.resolve();
  rendered: { state: QueryFormState; response: TimeSeriesResponse } | null = null;

  constructor(
    private readonly win: Window,
    private readonly baseUrl: string = "",
    private readonly query: FetchTimeseries = fetchTimeseries,
  ) {
    this.doc = win.document;
  }

  private element<T extends HTMLElement>(id: string): T {
    const found = this.doc.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  get termsInput(): HTMLInputElement {
    return this.element("terms-input");
  }

  get partySelect(): HTMLSelectElement {
    return this.element("party-select");
  }

  get scopeSelect(): HTMLSelectElement {
    return this.element("scope-select");
  }

  get relativeToggle(): HTMLInputElement {
    return this.element("relative-toggle");
  }

  get logToggle(): HTMLInputElement {
    return this.element("log-toggle");
  }

  get submitButton(): HTMLButtonElement {
    return this.element("submit-button");
  }

  get csvLink(): HTMLAnchorElement {
    return this.element("csv-link");
  }

  get errorBox(): HTMLElement {
    return this.element("error-box");
  }

  async init(): Promise<void> {
    try {
      const meta = await fetchMeta(this.baseUrl);
      for (const party of meta.parties) {
        const option = this.doc.createElement("option");
        option.value = party;
        option.textContent = party;
        this.partySelect.appendChild(option);
      }
    } catch {
      this.showError("service unreachable; party filter unavailable");
    }

    this.element<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
      event.preventDefault();
      this.submitFromForm();
    });
    this.termsInput.addEventListener("input", () => this.syncSubmitButton());
    this.win.addEventListener("popstate", () => {
      void this.applyState(parseState(this.win.location.search), false);
    });

    await this.applyState(parseState(this.win.location.search), false);
  }

  whenIdle(): Promise<void> {
    return this.pending;
  }

  formState(): QueryFormState {
    return {
      terms: parseTerms(this.termsInput.value),
      party: this.partySelect.value || null,
      normalize: this.relativeToggle.checked ? "relative" : "absolute",
      scope: this.scopeSelect.value === "all" ? "all" : "partisan",
      logScale: this.logToggle.checked,
    };
  }

  submitFromForm(): void {
    const state = this.formState();
    if (!canSubmit(state)) return;
    void this.applyState(state, true);
  }

  private fillForm(state: QueryFormState): void {
    this.termsInput.value = state.terms.join(", ");
    this.partySelect.value = state.party ?? "";
    this.scopeSelect.value = state.scope;
    this.relativeToggle.checked = state.normalize === "relative";
    this.logToggle.checked = state.logScale;
    this.syncSubmitButton();
  }

  private syncSubmitButton(): void {
    this.submitButton.disabled = parseTerms(this.termsInput.value).length === 0;
  }

  applyState(state: QueryFormState, push: boolean): Promise<void> {
    this.fillForm(state);
    if (push) {
      const target = serializeState(state) || this.win.location.pathname;
      if (!statesEqual(state, parseState(this.win.location.search))) {
        this.win.history.pushState(null, "", target);
      }
    }
    if (!canSubmit(state)) {
      this.rendered = null;
      this.element("chart").textContent = "";
      this.element("table").textContent = "";
      this.csvLink.hidden = true;
      return Promise.resolve();
    }
    const run = this.runQuery(state);
    this.pending = this.pending.then(() => run);
    return run;
  }

  private async runQuery(state: QueryFormState): Promise<void> {
    const ticket = ++this.sequence;
    try {
      const response = await this.query(this.baseUrl, state);
      if (ticket !== this.sequence) return; // a newer query superseded this one
      this.hideError();
      this.rendered = { state, response };
      renderChart(this.element("chart"), response.series, state);
      renderTable(this.element("table"), response.series, state.normalize);
      this.csvLink.href = csvUrl(this.baseUrl, state);
      this.csvLink.hidden = false;
    } catch (error) {
      if (ticket !== this.sequence) return;
      // keep the previous chart visible; only surface the message
      this.showError(error instanceof Error ? error.message : String(error));
    }
  }

  private showError(message: string): void {
    const box = this.errorBox;
    box.textContent = message;
    box.hidden = false;
  }

  private hideError(): void {
    const box = this.errorBox;
    box.textContent = "";
    box.hidden = true;
  }
}

export { DEFAULT_STATE };
