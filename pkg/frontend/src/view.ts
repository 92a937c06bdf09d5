/** Pure HTML renderers. Kept free of DOM and free of arithmetic: values are
 * formatted as received so the network-audit test can match every displayed
 * number back to an API response.
 */
import type { QuoteExplorer, LedgerView } from "./model.js";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Numbers are rendered with full precision — no rounding on the client. */
export function num(x: number): string {
  return String(x);
}

export function renderQuoteCard(explorer: QuoteExplorer): string {
  if (explorer.status === "infeasible") {
    return [
      `<div class="card card-infeasible">`,
      `<p>No affordable sample cost funds this request ` +
        `(search capped at ${num(explorer.infeasibleMaxCost ?? 0)} samples).</p>`,
      `<p>Try a larger effect size or a lower required power.</p>`,
      `</div>`,
    ].join("\n");
  }
  const q = explorer.lastQuote;
  if (!q) {
    return `<div class="card card-empty"><p>Set up a request to get a quote.</p></div>`;
  }
  const banner =
    explorer.status === "requoted-after-stale"
      ? `<div class="banner banner-stale">The instance state changed; ` +
        `this is a refreshed quote.</div>\n`
      : "";
  return [
    banner + `<div class="card card-quote" data-sequence="${q.sequence_no}">`,
    `<dl>`,
    `<dt>Sample cost</dt><dd class="v-cost">${num(q.cost)}</dd>`,
    `<dt>Allocated level</dt><dd class="v-level">${num(q.level)}</dd>`,
    `<dt>Samples after purchase</dt><dd class="v-n-after">${num(q.n_after)}</dd>`,
    `<dt>Valid against sequence</dt><dd class="v-sequence">${num(q.sequence_no)}</dd>`,
    `</dl>`,
    `<button class="submit" ${explorer.canSubmit() ? "" : "disabled "}type="submit">Run test</button>`,
    `</div>`,
  ].join("\n");
}

export function renderDecisionToast(explorer: QuoteExplorer): string {
  const d = explorer.lastDecision;
  if (!d) {
    return "";
  }
  const cls = d.rejected ? "toast-rejected" : "toast-accepted";
  const verdict = d.rejected ? "Null rejected" : "Null retained";
  return [
    `<div class="toast ${cls}">`,
    `<strong>${verdict}</strong> at level <span class="v-level">${num(d.level)}</span>, ` +
      `cost <span class="v-cost">${num(d.cost)}</span> samples.`,
    `</div>`,
  ].join("\n");
}

export function renderLedgerTable(ledger: LedgerView): string {
  const header =
    `<tr><th>#</th><th>Cost</th><th>Level</th><th>n after</th>` +
    `<th>p-value</th><th>Decision</th><th>Pool A</th><th>Pool B</th></tr>`;
  const rows = ledger.rows.map(
    (r) =>
      `<tr class="${r.rejected ? "rejected" : "retained"}">` +
      `<td>${num(r.sequence_no)}</td>` +
      `<td>${num(r.cost)}</td>` +
      `<td>${num(r.level)}</td>` +
      `<td>${num(r.n_after)}</td>` +
      `<td>${num(r.p_value)}</td>` +
      `<td>${esc(r.rejected ? "reject" : "retain")}</td>` +
      `<td>${num(r.pool_a_after)}</td>` +
      `<td>${num(r.pool_b_after)}</td>` +
      `</tr>`,
  );
  return `<table class="ledger">${header}${rows.join("")}</table>`;
}

/** Every numeric token currently displayed; used by the audit test. */
export function extractDisplayedNumbers(html: string): number[] {
  const text = html.replace(/<[^>]*>/g, " ");
  const matches = text.match(/-?\d+(\.\d+)?([eE][+-]?\d+)?/g) ?? [];
  return matches.map(Number);
}
