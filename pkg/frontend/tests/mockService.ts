/** An in-memory stand-in for the HTTP service, shaped like `fetch`.
 *
 * Cost quoting is a toy monotone rule (enough structure for UI contract
 * tests), and every response body passes through a recorder so the audit
 * test can prove displayed numbers came off the wire.
 */
import type { FetchLike } from "../src/api.js";
import type { LedgerEntry, QuoteRequest } from "../src/types.js";

export interface MockOptions {
  /** Force the next N executes to answer 409 stale. */
  staleConflicts?: number;
  /** Answer every quote as infeasible. */
  infeasible?: boolean;
  maxCost?: number;
}

export interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

export class MockService {
  sequenceNo = 0;
  n = 2000;
  ledger: LedgerEntry[] = [];
  calls: Recorded[] = [];
  /** Every number that has appeared in any response body. */
  servedNumbers = new Set<number>();
  private staleLeft: number;

  constructor(private readonly opts: MockOptions = {}) {
    this.staleLeft = opts.staleConflicts ?? 0;
  }

  /** Toy but monotone: higher power or smaller effect costs more samples. */
  private quoteFor(req: QuoteRequest): { cost: number; level: number; n_after: number } {
    const cost = Math.ceil(
      (100 * req.required_power) / Math.max(req.effect_size, 0.01),
    );
    const level = 0.05 * (1 - Math.pow(0.999, cost));
    return { cost, level, n_after: this.n + cost };
  }

  private respond(status: number, body: unknown): { status: number; json(): Promise<unknown> } {
    const scan = (v: unknown): void => {
      if (typeof v === "number") {
        this.servedNumbers.add(v);
      } else if (Array.isArray(v)) {
        v.forEach(scan);
      } else if (v && typeof v === "object") {
        Object.values(v).forEach(scan);
      }
    };
    scan(body);
    return { status, json: () => Promise.resolve(body) };
  }

  fetch: FetchLike = (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body) : undefined;
    this.calls.push({ url, method, body });

    if (url.includes("/quote")) {
      if (this.opts.infeasible) {
        return Promise.resolve(
          this.respond(422, {
            detail: { infeasible: true, max_cost: this.opts.maxCost ?? 100 },
          }),
        );
      }
      const q = this.quoteFor(body as QuoteRequest);
      return Promise.resolve(
        this.respond(200, {
          ...q,
          stability_bound: null,
          sequence_no: this.sequenceNo,
        }),
      );
    }

    if (url.includes("/execute")) {
      const expected = (body as { expected_sequence_no: number })
        .expected_sequence_no;
      if (this.staleLeft > 0 || expected !== this.sequenceNo) {
        if (this.staleLeft > 0) {
          this.staleLeft -= 1;
          this.sequenceNo += 1; // another client slipped in
        }
        return Promise.resolve(
          this.respond(409, {
            detail: {
              stale_sequence_no: expected,
              current_sequence_no: this.sequenceNo,
            },
          }),
        );
      }
      const q = this.quoteFor(body as QuoteRequest);
      const pValue = (body as { p_value: number }).p_value;
      const rejected = pValue <= q.level;
      this.n = q.n_after;
      this.sequenceNo += 1;
      const entry: LedgerEntry = {
        sequence_no: this.sequenceNo,
        cost: q.cost,
        level: q.level,
        n_after: q.n_after,
        p_value: pValue,
        rejected,
        pool_a_after: 0.0475 * Math.pow(0.999, this.n - 2000),
        pool_b_after: rejected ? 0.05 : 0,
      };
      this.ledger.push(entry);
      return Promise.resolve(
        this.respond(200, {
          rejected,
          level: q.level,
          cost: q.cost,
          n_after: q.n_after,
          pool_a: entry.pool_a_after,
          pool_b: entry.pool_b_after,
          sequence_no: this.sequenceNo,
          wealth_floor: entry.pool_a_after,
        }),
      );
    }

    if (url.includes("/ledger")) {
      return Promise.resolve(
        this.respond(200, { entries: this.ledger, total: this.ledger.length }),
      );
    }

    if (url.includes("/state")) {
      return Promise.resolve(
        this.respond(200, {
          instance_id: "mock",
          variant: "asr",
          pool_a: 0.0475,
          pool_b: 0,
          wealth: 0.0475,
          wealth_floor: 0.0475,
          n: this.n,
          tests_done: this.ledger.length,
          rejections: this.ledger.filter((e) => e.rejected).length,
          sequence_no: this.sequenceNo,
          created_at: "2026-01-01T00:00:00Z",
        }),
      );
    }

    return Promise.resolve(this.respond(404, { detail: "not found" }));
  };
}

export function baseRequest(overrides: Partial<QuoteRequest> = {}): QuoteRequest {
  return {
    family: "z_known_sigma",
    null_value: 0,
    alternative_kind: "unbounded_one_sided",
    alternative_theta: null,
    sigma: 10,
    effect_size: 1,
    required_power: 0.9,
    ...overrides,
  };
}
