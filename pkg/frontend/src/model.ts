/** View models for the console.
 *
 * The quote explorer is a small state machine around the service's optimistic
 * concurrency contract: quotes are pinned to the state sequence they were
 * computed against; an execute rejected as stale triggers an automatic
 * re-quote and surfaces a banner. No statistics happen here — every number
 * held by these models came out of an API response.
 */
import {
  ApiClient,
  InfeasibleError,
  StaleSequenceError,
} from "./api.js";
import type {
  ExecuteResponse,
  LedgerEntry,
  Quote,
  QuoteRequest,
} from "./types.js";

export type ExplorerStatus =
  | "idle"
  | "quoted"
  | "infeasible"
  | "requoted-after-stale"
  | "executed";

export interface QuoteHistoryItem {
  request: QuoteRequest;
  quote: Quote;
}

export class QuoteExplorer {
  status: ExplorerStatus = "idle";
  lastQuote: Quote | null = null;
  lastRequest: QuoteRequest | null = null;
  lastDecision: ExecuteResponse | null = null;
  /** Populated when the service declares the request unfundable. */
  infeasibleMaxCost: number | null = null;
  history: QuoteHistoryItem[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly instanceId: string,
  ) {}

  /** Quote the current form; used directly by the power slider. */
  async fetchQuote(request: QuoteRequest): Promise<Quote | null> {
    this.lastRequest = request;
    this.lastDecision = null;
    try {
      const quote = await this.api.quote(this.instanceId, request);
      this.lastQuote = quote;
      this.infeasibleMaxCost = null;
      this.status = "quoted";
      this.history.push({ request, quote });
      return quote;
    } catch (err) {
      if (err instanceof InfeasibleError) {
        this.lastQuote = null;
        this.infeasibleMaxCost = err.detail.max_cost;
        this.status = "infeasible";
        return null;
      }
      throw err;
    }
  }

  /** Whether the submit button is live: needs a current, feasible quote. */
  canSubmit(): boolean {
    return this.status === "quoted" || this.status === "requoted-after-stale";
  }

  /** Execute pinned to the last quote's sequence; on a stale conflict,
   * re-quote once and leave the refreshed quote for the user to resubmit. */
  async submit(pValue: number): Promise<ExecuteResponse | null> {
    if (!this.canSubmit() || !this.lastQuote || !this.lastRequest) {
      throw new Error("no current quote to submit against");
    }
    try {
      const decision = await this.api.execute(
        this.instanceId,
        this.lastRequest,
        pValue,
        this.lastQuote.sequence_no,
      );
      this.lastDecision = decision;
      this.status = "executed";
      return decision;
    } catch (err) {
      if (err instanceof StaleSequenceError) {
        const refreshed = await this.api.quote(
          this.instanceId,
          this.lastRequest,
        );
        this.lastQuote = refreshed;
        this.history.push({ request: this.lastRequest, quote: refreshed });
        this.status = "requoted-after-stale";
        return null;
      }
      throw err;
    }
  }
}

/** Chart series point; x is the ledger sequence number. */
export interface SeriesPoint {
  x: number;
  y: number;
  rejected: boolean;
}

export class LedgerView {
  rows: LedgerEntry[] = [];
  total = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly instanceId: string,
  ) {}

  async refresh(from = 0, to?: number): Promise<void> {
    const page = await this.api.ledger(this.instanceId, from, to);
    this.rows = page.entries;
    this.total = page.total;
  }

  /** Decaying-pool wealth over time, straight from the ledger rows. */
  poolASeries(): SeriesPoint[] {
    return this.rows.map((r) => ({
      x: r.sequence_no,
      y: r.pool_a_after,
      rejected: r.rejected,
    }));
  }

  /** Reward-pool wealth over time (zero for single-pool variants). */
  poolBSeries(): SeriesPoint[] {
    return this.rows.map((r) => ({
      x: r.sequence_no,
      y: r.pool_b_after,
      rejected: r.rejected,
    }));
  }

  costSeries(): SeriesPoint[] {
    return this.rows.map((r) => ({
      x: r.sequence_no,
      y: r.cost,
      rejected: r.rejected,
    }));
  }

  rejectionCount(): number {
    return this.rows.filter((r) => r.rejected).length;
  }
}
