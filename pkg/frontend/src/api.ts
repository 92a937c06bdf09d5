/** Thin typed client over the service API.
 *
 * The fetch implementation is injected so tests can intercept every network
 * round-trip; the console itself never computes statistics, it only relays
 * what these calls return.
 */
import type {
  ExecuteResponse,
  InfeasibleDetail,
  InstanceState,
  LedgerPage,
  Quote,
  QuoteRequest,
  StaleDetail,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class InfeasibleError extends Error {
  constructor(public readonly detail: InfeasibleDetail) {
    super(`infeasible request (max_cost ${detail.max_cost})`);
  }
}

export class StaleSequenceError extends Error {
  constructor(public readonly detail: StaleDetail) {
    super(
      `stale sequence ${detail.stale_sequence_no}; ` +
        `current is ${detail.current_sequence_no}`,
    );
  }
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: unknown,
  ) {
    super(`api error ${status}: ${JSON.stringify(detail)}`);
  }
}

interface ErrorBody {
  detail?: unknown;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap<T>(resp);
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    return this.unwrap<T>(resp);
  }

  private async unwrap<T>(resp: {
    status: number;
    json(): Promise<unknown>;
  }): Promise<T> {
    const body = (await resp.json()) as ErrorBody & T;
    if (resp.status >= 200 && resp.status < 300) {
      return body;
    }
    const detail = body?.detail;
    if (resp.status === 409 && detail && typeof detail === "object" &&
        "current_sequence_no" in (detail as object)) {
      throw new StaleSequenceError(detail as StaleDetail);
    }
    if (resp.status === 422 && detail && typeof detail === "object" &&
        "infeasible" in (detail as object)) {
      throw new InfeasibleError(detail as InfeasibleDetail);
    }
    throw new ApiError(resp.status, detail);
  }

  getState(instanceId: string): Promise<InstanceState> {
    return this.get(`/instances/${instanceId}/state`);
  }

  quote(instanceId: string, request: QuoteRequest): Promise<Quote> {
    return this.post(`/instances/${instanceId}/quote`, request);
  }

  execute(
    instanceId: string,
    request: QuoteRequest,
    pValue: number,
    expectedSequenceNo: number,
  ): Promise<ExecuteResponse> {
    return this.post(`/instances/${instanceId}/execute`, {
      ...request,
      p_value: pValue,
      expected_sequence_no: expectedSequenceNo,
    });
  }

  ledger(instanceId: string, from = 0, to?: number): Promise<LedgerPage> {
    const range = to === undefined ? `from=${from}` : `from=${from}&to=${to}`;
    return this.get(`/instances/${instanceId}/ledger?${range}`);
  }
}
