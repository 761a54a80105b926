/** Canned service responses: the only backend the test suite ever talks to. */

import type { Envelope, OutlineNode } from "../src/api.js";

export const COMPREHENSIVE_FIXTURE: Envelope = {
  intent: "comprehensive",
  origin: "default",
  cache_hit: false,
  answer: {
    model_only: "Canberra",
    search_only: {
      digest: "Canberra is the capital, chosen in 1908.",
      results: [
        {
          rank: 1,
          title: "Capital of Australia",
          url: "https://example.com/au",
          snippet: "Canberra became the capital in 1913.",
        },
        {
          rank: 2,
          title: "",
          url: "https://example.org/cities",
          snippet: "Largest cities by population.",
        },
      ],
    },
    hybrid: {
      summary: "Canberra, purpose-built as the capital.",
      links: [
        "https://example.com/au",
        "https://example.org/cities",
        "https://example.net/extra",
      ],
    },
  },
  trace: [{ step: "model_answer", duration_ms: 3, calls: { mock: 1 } }],
};

export const CACHED_FIXTURE: Envelope = {
  ...COMPREHENSIVE_FIXTURE,
  cache_hit: true,
  trace: [{ step: "cache_lookup", duration_ms: 0, calls: {} }],
};

/** Nested outline exercising depth changes, multiple roots, and deep jumps. */
export const OUTLINE_NODES: OutlineNode[] = [
  { level: 2, text: "Nav Menu", children: [] },
  {
    level: 1,
    text: "Field Manual",
    children: [
      {
        level: 2,
        text: "Basics",
        children: [
          { level: 3, text: "Setup", children: [] },
          { level: 3, text: "Config", children: [] },
        ],
      },
      {
        level: 2,
        text: "Advanced",
        children: [
          {
            level: 3,
            text: "Tuning",
            children: [{ level: 4, text: "Flags", children: [] }],
          },
        ],
      },
    ],
  },
  {
    level: 1,
    text: "Appendix",
    children: [{ level: 2, text: "Glossary", children: [] }],
  },
];

export const OUTLINE_PREORDER = [
  "Nav Menu",
  "Field Manual",
  "Basics",
  "Setup",
  "Config",
  "Advanced",
  "Tuning",
  "Flags",
  "Appendix",
  "Glossary",
];

export const OUTLINE_FIXTURE: Envelope = {
  intent: "web_headers",
  origin: "grammar",
  cache_hit: false,
  answer: { outline: OUTLINE_NODES },
  trace: [
    { step: "fetch_page", duration_ms: 1, calls: { web: 1 } },
    { step: "extract_headings", duration_ms: 0, calls: {} },
  ],
};

export const ARXIV_FIXTURE: Envelope = {
  intent: "arxiv_search",
  origin: "grammar",
  cache_hit: false,
  answer: {
    entries: [
      {
        arxiv_id: "2400.00001v1",
        title: "Selective State Spaces for Long Sequences",
        abstract: "We study a selective state-space layer.",
        authors: ["Ada Example", "Grace Sample"],
        published: "2024-01-15",
        link: "https://arxiv.org/abs/2400.00001v1",
      },
      {
        arxiv_id: "2400.00002v2",
        title: "Hardware-Aware Scans",
        abstract: "A scan kernel survey.",
        authors: ["Lin Test"],
        published: "2024-02-02",
        link: "https://arxiv.org/abs/2400.00002v2",
      },
    ],
  },
  trace: [{ step: "arxiv_search", duration_ms: 2, calls: { arxiv: 1 } }],
};

export const SUMMARY_FIXTURE: Envelope = {
  intent: "web_summarize",
  origin: "grammar",
  cache_hit: false,
  answer: {
    summary: "A short gloss of the page.",
    source: "https://example.com/post",
  },
  trace: [{ step: "summarize_page", duration_ms: 2, calls: { web: 1, mock: 1 } }],
};

export const ERROR_400_BODY = {
  error: {
    kind: "malformed_url",
    message: "expected an absolute http(s) URL, got 'notaurl'",
    step: "route",
  },
};

/** Markup-shaped strings that must always render as inert text. */
export const HOSTILE_TEXT = '<img src=x onerror="alert(1)"><script>alert(2)</script>';
export const HOSTILE_CLOSER = '"/><b>not bold</b>';
export const HOSTILE_LINK = "javascript:alert(3)";

export const HOSTILE_COMPREHENSIVE: Envelope = {
  intent: "comprehensive",
  origin: "llm_router",
  cache_hit: true,
  answer: {
    model_only: HOSTILE_TEXT,
    search_only: {
      digest: HOSTILE_CLOSER,
      results: [
        { rank: 1, title: HOSTILE_TEXT, url: "https://example.com/x", snippet: HOSTILE_TEXT },
      ],
    },
    hybrid: {
      summary: HOSTILE_TEXT,
      links: [HOSTILE_LINK, "https://example.com/ok"],
    },
  },
  trace: [],
};

export const HOSTILE_OUTLINE: OutlineNode[] = [
  {
    level: 1,
    text: HOSTILE_TEXT,
    children: [{ level: 2, text: HOSTILE_CLOSER, children: [] }],
  },
];
