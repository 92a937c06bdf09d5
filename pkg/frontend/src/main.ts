/** Browser bootstrap: wires the form, the quote card, and the ledger panel
 * to one instance of the service. All logic lives in the models; this file
 * only moves strings into the DOM.
 */
import { ApiClient } from "./api.js";
import { LedgerView, QuoteExplorer } from "./model.js";
import {
  renderDecisionToast,
  renderLedgerTable,
  renderQuoteCard,
} from "./view.js";
import type { QuoteRequest } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function readForm(): QuoteRequest {
  return {
    family: el<HTMLSelectElement>("family").value,
    null_value: 0,
    alternative_kind: "unbounded_one_sided",
    alternative_theta: null,
    sigma: Number(el<HTMLInputElement>("sigma").value),
    effect_size: Number(el<HTMLInputElement>("effect").value),
    required_power: Number(el<HTMLInputElement>("power").value),
  };
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const instanceId = params.get("instance") ?? "default";
  const api = new ApiClient("", (url, init) => fetch(url, init));
  const explorer = new QuoteExplorer(api, instanceId);
  const ledger = new LedgerView(api, instanceId);

  const quoteCard = el<HTMLDivElement>("quote-card");
  const toast = el<HTMLDivElement>("toast");
  const ledgerPanel = el<HTMLDivElement>("ledger");
  const counter = el<HTMLSpanElement>("rejections");

  const paint = () => {
    quoteCard.innerHTML = renderQuoteCard(explorer);
    toast.innerHTML = renderDecisionToast(explorer);
    ledgerPanel.innerHTML = renderLedgerTable(ledger);
    counter.textContent = String(ledger.rejectionCount());
    const button = quoteCard.querySelector<HTMLButtonElement>("button.submit");
    button?.addEventListener("click", submit);
  };

  const requote = async () => {
    await explorer.fetchQuote(readForm());
    paint();
  };

  const submit = async () => {
    const p = Number(el<HTMLInputElement>("p-value").value);
    const decision = await explorer.submit(p);
    if (decision !== null) {
      await ledger.refresh();
    }
    paint(); // a stale conflict repaints with the refreshed quote + banner
  };

  for (const id of ["family", "sigma", "effect", "power"]) {
    el(id).addEventListener("input", () => {
      void requote();
    });
  }

  void ledger.refresh().then(paint);
}

if (typeof document !== "undefined") {
  boot();
}
