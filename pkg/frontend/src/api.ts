/** Typed client for the query service's JSON contract.
 *
 * Everything the console knows about the backend lives here: the envelope
 * returned by POST /v1/query, the one error shape, and the outcome union the
 * UI switches on. No other module touches fetch.
 */

export type QueryMode =
  | "auto"
  | "arxiv"
  | "web_summarize"
  | "web_headers"
  | "comprehensive";

export const QUERY_MODES: QueryMode[] = [
  "auto",
  "arxiv",
  "web_summarize",
  "web_headers",
  "comprehensive",
];

export interface TraceStep {
  step: string;
  duration_ms: number;
  calls: Record<string, number>;
  note?: string;
}

export interface SearchResultRow {
  rank: number;
  title: string;
  url: string;
  snippet: string;
}

export interface SearchChannel {
  digest: string;
  results: SearchResultRow[];
}

export interface HybridChannel {
  summary: string;
  links: string[];
}

export interface TriChannelAnswer {
  model_only: string;
  search_only: SearchChannel;
  hybrid: HybridChannel;
}

export interface ArxivEntry {
  arxiv_id: string;
  title: string;
  abstract: string;
  authors: string[];
  published: string;
  link: string;
}

export interface OutlineNode {
  level: number;
  text: string;
  children: OutlineNode[];
}

export interface SummaryAnswer {
  summary: string;
  source: string;
}

interface EnvelopeBase {
  origin: string;
  cache_hit: boolean;
  trace: TraceStep[];
}

export type Envelope = EnvelopeBase &
  (
    | { intent: "comprehensive"; answer: TriChannelAnswer }
    | { intent: "arxiv_search"; answer: { entries: ArxivEntry[] } }
    | { intent: "web_headers"; answer: { outline: OutlineNode[] } }
    | { intent: "web_summarize"; answer: SummaryAnswer }
  );

export interface ApiError {
  kind: string;
  message: string;
  step: string | null;
}

export type QueryOutcome =
  | { kind: "success"; envelope: Envelope }
  | { kind: "api_error"; status: number; error: ApiError }
  | { kind: "network_error"; message: string };

/** POST a query; never throws — network failures become an outcome. */
export async function postQuery(
  serviceUrl: string,
  query: string,
  mode: QueryMode,
): Promise<QueryOutcome> {
  const body: { query: string; mode?: QueryMode } = { query };
  if (mode !== "auto") body.mode = mode;
  let response: Response;
  try {
    response = await fetch(`${serviceUrl}/v1/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  } catch (exc) {
    return { kind: "network_error", message: messageOf(exc) };
  }
  let payload: unknown;
  try {
    payload = await response.json();
  } catch (exc) {
    return { kind: "network_error", message: messageOf(exc) };
  }
  if (!response.ok) {
    return {
      kind: "api_error",
      status: response.status,
      error: errorOf(payload),
    };
  }
  return { kind: "success", envelope: payload as Envelope };
}

function messageOf(exc: unknown): string {
  return exc instanceof Error ? exc.message : String(exc);
}

function errorOf(payload: unknown): ApiError {
  const wrapped =
    typeof payload === "object" && payload !== null
      ? (payload as { error?: unknown }).error
      : null;
  if (typeof wrapped === "object" && wrapped !== null) {
    const raw = wrapped as Record<string, unknown>;
    return {
      kind: typeof raw.kind === "string" ? raw.kind : "unknown",
      message: typeof raw.message === "string" ? raw.message : "",
      step: typeof raw.step === "string" ? raw.step : null,
    };
  }
  return { kind: "unknown", message: "malformed error response", step: null };
}
