/** DOM renderers for every answer shape the service returns.
 *
 * Injection safety rule: every piece of response text lands in the page via
 * textContent, never markup. URLs become anchors only when they are absolute
 * http(s) URLs; anything else is shown as plain text.
 */

import type {
  ApiError,
  ArxivEntry,
  Envelope,
  OutlineNode,
  SummaryAnswer,
  TriChannelAnswer,
} from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function isHttpUrl(url: string): boolean {
  return /^https?:\/\//i.test(url);
}

/** Anchor for http(s) URLs; a plain text span for anything else. */
export function linkTo(url: string, label = ""): HTMLElement {
  const text = label || url;
  if (!isHttpUrl(url)) {
    return el("span", "not-a-link", text);
  }
  const anchor = el("a", "", text);
  anchor.href = url;
  anchor.target = "_blank";
  anchor.rel = "noopener noreferrer";
  return anchor;
}

export function cacheBadge(): HTMLElement {
  const badge = el("span", "cache-badge", "served from cache");
  badge.title = "answered from the similarity cache, no backend calls";
  return badge;
}

function panel(title: string): HTMLElement {
  const section = el("section", "panel");
  section.append(el("h2", "", title));
  return section;
}

export function renderComprehensive(answer: TriChannelAnswer): HTMLElement {
  const wrap = el("div", "panels");

  const model = panel("Model");
  model.append(el("p", "model-text", answer.model_only || "(empty)"));
  wrap.append(model);

  const search = panel("Search");
  search.append(el("p", "digest", answer.search_only.digest || "(no digest)"));
  const results = el("ol", "results");
  for (const row of answer.search_only.results) {
    const item = el("li", "result");
    item.append(linkTo(row.url, row.title || row.url));
    item.append(el("p", "snippet", row.snippet));
    results.append(item);
  }
  search.append(results);
  wrap.append(search);

  const hybrid = panel("Hybrid");
  hybrid.append(el("p", "hybrid-text", answer.hybrid.summary || "(empty)"));
  const links = el("ul", "links");
  for (const url of answer.hybrid.links) {
    const item = el("li");
    item.append(linkTo(url));
    links.append(item);
  }
  hybrid.append(links);
  wrap.append(hybrid);

  return wrap;
}

/** Collapsible outline; nesting depth in the DOM mirrors node depth. */
export function renderOutline(nodes: OutlineNode[]): HTMLElement {
  const container = el("div", "outline");
  if (nodes.length === 0) {
    container.append(el("p", "empty", "(no headings)"));
    return container;
  }
  container.append(outlineList(nodes));
  return container;
}

function outlineList(nodes: OutlineNode[]): HTMLUListElement {
  const list = el("ul", "outline-list");
  for (const node of nodes) {
    list.append(outlineItem(node));
  }
  return list;
}

function outlineItem(node: OutlineNode): HTMLLIElement {
  const item = el("li", "outline-node");
  const row = el("div", "outline-row");
  if (node.children.length > 0) {
    const toggle = el("button", "outline-toggle", "−");
    toggle.type = "button";
    toggle.setAttribute("aria-expanded", "true");
    const children = outlineList(node.children);
    toggle.addEventListener("click", () => {
      const collapsed = children.hidden;
      children.hidden = !collapsed;
      toggle.textContent = collapsed ? "−" : "+";
      toggle.setAttribute("aria-expanded", String(collapsed));
    });
    row.append(toggle);
    row.append(el("span", "outline-text", node.text));
    item.append(row);
    item.append(children);
  } else {
    row.append(el("span", "outline-leaf-mark", "·"));
    row.append(el("span", "outline-text", node.text));
    item.append(row);
  }
  return item;
}

export function renderArxivEntries(entries: ArxivEntry[]): HTMLElement {
  const container = el("div", "arxiv");
  if (entries.length === 0) {
    container.append(el("p", "empty", "(no results)"));
    return container;
  }
  const list = el("ol", "arxiv-list");
  for (const entry of entries) {
    const item = el("li", "arxiv-entry");
    item.append(linkTo(entry.link, entry.title));
    item.append(
      el("p", "arxiv-meta", `${entry.authors.join(", ")} — ${entry.published}`),
    );
    item.append(el("p", "arxiv-abstract", entry.abstract));
    list.append(item);
  }
  container.append(list);
  return container;
}

export function renderSummary(answer: SummaryAnswer): HTMLElement {
  const container = el("div", "summary");
  container.append(el("p", "summary-text", answer.summary));
  const source = el("p", "summary-source", "source: ");
  source.append(linkTo(answer.source));
  container.append(source);
  return container;
}

export function renderError(error: ApiError): HTMLElement {
  const box = el("div", "error-box");
  box.append(el("span", "error-kind", error.kind));
  box.append(el("span", "error-message", error.message));
  return box;
}

/** One rendered view per envelope, with the cache badge when it applies. */
export function renderEnvelope(envelope: Envelope): HTMLElement {
  const view = el("div", "answer");
  const header = el("div", "answer-header");
  header.append(el("span", "intent-tag", envelope.intent));
  if (envelope.cache_hit) header.append(cacheBadge());
  view.append(header);
  switch (envelope.intent) {
    case "comprehensive":
      view.append(renderComprehensive(envelope.answer));
      break;
    case "arxiv_search":
      view.append(renderArxivEntries(envelope.answer.entries));
      break;
    case "web_headers":
      view.append(renderOutline(envelope.answer.outline));
      break;
    case "web_summarize":
      view.append(renderSummary(envelope.answer));
      break;
  }
  return view;
}
