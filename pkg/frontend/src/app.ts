/** Console wiring: one input, one in-flight request, an auditable history.
 *
 * State rules: the submit control is disabled whenever the input is blank or
 * a request is already in flight; history grows append-only and renders
 * newest first; clicking a history entry repopulates the input but never
 * auto-submits; a failed request leaves the input untouched and offers a
 * retry for network failures.
 */

import { postQuery, QUERY_MODES } from "./api.js";
import type { QueryMode, QueryOutcome } from "./api.js";
import { cacheBadge, el, renderEnvelope, renderError } from "./render.js";

export interface HistoryEntry {
  query: string;
  intent: string;
  cacheHit: boolean;
}

export interface ViewState {
  inFlight: boolean;
  history: HistoryEntry[];
}

export interface AppOptions {
  serviceUrl?: string;
}

export interface App {
  state: ViewState;
  form: HTMLFormElement;
  input: HTMLInputElement;
  modeSelect: HTMLSelectElement;
  submitButton: HTMLButtonElement;
  result: HTMLElement;
  historyList: HTMLOListElement;
  /** Resolves when the most recent submission has fully settled. */
  settled: Promise<void>;
}

export function createApp(root: HTMLElement, options: AppOptions = {}): App {
  const serviceUrl = options.serviceUrl ?? "";

  const form = el("form", "query-form");
  const input = el("input", "query-input");
  input.type = "text";
  input.placeholder =
    'free-form question, or "arxiv + topic", "web + summarize + url", ' +
    '"web + give me the headers + url"';
  const modeSelect = el("select", "mode-select");
  for (const mode of QUERY_MODES) {
    const option = el("option", "", mode);
    option.value = mode;
    modeSelect.append(option);
  }
  const submitButton = el("button", "submit-button", "Ask");
  submitButton.type = "submit";
  submitButton.disabled = true;
  form.append(input, modeSelect, submitButton);

  const result = el("div", "result");
  const historySection = el("aside", "history");
  historySection.append(el("h2", "", "History"));
  const historyList = el("ol", "history-list");
  historySection.append(historyList);

  root.append(form, result, historySection);

  const app: App = {
    state: { inFlight: false, history: [] },
    form,
    input,
    modeSelect,
    submitButton,
    result,
    historyList,
    settled: Promise.resolve(),
  };

  const refreshSubmitState = () => {
    submitButton.disabled = app.state.inFlight || input.value.trim() === "";
  };
  input.addEventListener("input", refreshSubmitState);

  const run = async (query: string, mode: QueryMode) => {
    app.state.inFlight = true;
    refreshSubmitState();
    const outcome = await postQuery(serviceUrl, query, mode);
    app.state.inFlight = false;
    refreshSubmitState();
    showOutcome(app, query, mode, outcome, run);
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = input.value.trim();
    if (query === "" || app.state.inFlight) return;
    app.settled = run(query, modeSelect.value as QueryMode);
  });

  historyList.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const entryButton = target.closest("button.history-entry");
    if (!(entryButton instanceof HTMLButtonElement)) return;
    input.value = entryButton.dataset.query ?? "";
    refreshSubmitState();
  });

  return app;
}

function showOutcome(
  app: App,
  query: string,
  mode: QueryMode,
  outcome: QueryOutcome,
  retry: (query: string, mode: QueryMode) => Promise<void>,
): void {
  app.result.replaceChildren();
  if (outcome.kind === "success") {
    app.result.append(renderEnvelope(outcome.envelope));
    app.state.history.push({
      query,
      intent: outcome.envelope.intent,
      cacheHit: outcome.envelope.cache_hit,
    });
    renderHistory(app);
    return;
  }
  if (outcome.kind === "api_error") {
    app.result.append(renderError(outcome.error));
    return;
  }
  const box = renderError({
    kind: "network_error",
    message: outcome.message,
    step: null,
  });
  const retryButton = el("button", "retry-button", "Retry");
  retryButton.type = "button";
  retryButton.addEventListener("click", () => {
    if (app.state.inFlight) return;
    app.settled = retry(query, mode);
  });
  box.append(retryButton);
  app.result.append(box);
}

function renderHistory(app: App): void {
  app.historyList.replaceChildren();
  for (const entry of [...app.state.history].reverse()) {
    const item = el("li", "history-item");
    const button = el("button", "history-entry");
    button.type = "button";
    button.dataset.query = entry.query;
    button.append(el("span", "history-query", entry.query));
    button.append(el("span", "history-intent", entry.intent));
    if (entry.cacheHit) button.append(cacheBadge());
    item.append(button);
    app.historyList.append(item);
  }
}
