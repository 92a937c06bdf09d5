/** Interception audit: the console must not compute statistics. Every number
 * it displays has to be traceable to a number that crossed the network.
 */
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LedgerView, QuoteExplorer } from "../src/model.js";
import {
  extractDisplayedNumbers,
  renderDecisionToast,
  renderLedgerTable,
  renderQuoteCard,
} from "../src/view.js";
import { MockService, baseRequest } from "./mockService.js";

describe("network interception audit", () => {
  it("all displayed numbers originate from API responses", async () => {
    const service = new MockService();
    const api = new ApiClient("", service.fetch);
    const explorer = new QuoteExplorer(api, "inst");
    const ledger = new LedgerView(api, "inst");

    // drive a realistic session: quote, execute twice, browse the ledger
    await explorer.fetchQuote(baseRequest());
    await explorer.submit(0.0001);
    await explorer.fetchQuote(baseRequest({ required_power: 0.95 }));
    await explorer.submit(0.8);
    await explorer.fetchQuote(baseRequest({ effect_size: 0.5 }));
    await ledger.refresh();

    const html = [
      renderQuoteCard(explorer),
      renderDecisionToast(explorer),
      renderLedgerTable(ledger),
    ].join("\n");

    const displayed = extractDisplayedNumbers(html);
    expect(displayed.length).toBeGreaterThan(10);
    for (const value of displayed) {
      expect(
        service.servedNumbers.has(value),
        `displayed ${value} never appeared in any API response`,
      ).toBe(true);
    }
  });

  it("chart series are verbatim ledger fields", async () => {
    const service = new MockService();
    const api = new ApiClient("", service.fetch);
    const explorer = new QuoteExplorer(api, "inst");
    const ledger = new LedgerView(api, "inst");
    for (const p of [0.0001, 0.6, 0.3]) {
      await explorer.fetchQuote(baseRequest());
      await explorer.submit(p);
    }
    await ledger.refresh();
    for (const series of [
      ledger.poolASeries(),
      ledger.poolBSeries(),
      ledger.costSeries(),
    ]) {
      for (const point of series) {
        expect(service.servedNumbers.has(point.y)).toBe(true);
        expect(service.servedNumbers.has(point.x)).toBe(true);
      }
    }
  });

  it("p-values submitted by the user are echoed, not recomputed", async () => {
    const service = new MockService();
    const api = new ApiClient("", service.fetch);
    const explorer = new QuoteExplorer(api, "inst");
    const ledger = new LedgerView(api, "inst");
    await explorer.fetchQuote(baseRequest());
    await explorer.submit(0.123456789);
    await ledger.refresh();
    expect(ledger.rows[0].p_value).toBe(0.123456789);
  });
});
