/**
 * Client-side bracket shortcut detection.
 *
 * Scans the draft for balanced single-bracket passages like
 * "[add more detail here]" and reports their spans (brackets included) so
 * the app can dispatch them to the classify endpoint. Nested or unbalanced
 * brackets are skipped; empty brackets are reported but stay inert.
 */

export interface BracketSpan {
  start: number;
  end: number;
  inner: string;
}

const BRACKET_RE = /\[([^\[\]]*)\]/g;

export function detectBrackets(content: string): BracketSpan[] {
  const spans: BracketSpan[] = [];
  for (const match of content.matchAll(BRACKET_RE)) {
    const start = match.index ?? 0;
    spans.push({ start, end: start + match[0].length, inner: match[1] ?? '' });
  }
  return spans;
}

/** Spans worth dispatching: non-empty bracket content. */
export function dispatchableBrackets(content: string): BracketSpan[] {
  return detectBrackets(content).filter((span) => span.inner.trim().length > 0);
}
