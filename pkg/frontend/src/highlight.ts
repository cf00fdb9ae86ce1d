/**
 * Render item text as HTML with rationale spans wrapped in <mark>.
 * Span indices are codepoint offsets (the server counts codepoints, JS
 * strings count UTF-16 units), so slicing goes through a codepoint array.
 */
import type { RationaleMatch } from "./api";

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function highlightHtml(text: string, matches: RationaleMatch[]): string {
  const cps = Array.from(text);
  const sorted = [...matches].sort((a, b) => a.start - b.start);
  let html = "";
  let cursor = 0;
  for (const m of sorted) {
    // ignore malformed or overlapping spans rather than corrupting the text
    if (m.start < cursor || m.end > cps.length || m.start >= m.end) continue;
    html += escapeHtml(cps.slice(cursor, m.start).join(""));
    const cls = m.polarity === "positive" ? "pos" : m.polarity === "negative" ? "neg" : "neu";
    html += `<mark class="${cls}" title="${escapeHtml(m.polarity)}">`;
    html += escapeHtml(cps.slice(m.start, m.end).join(""));
    html += "</mark>";
    cursor = m.end;
  }
  html += escapeHtml(cps.slice(cursor).join(""));
  return html;
}
