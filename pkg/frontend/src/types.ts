/** Wire types mirroring the service's HTTP+JSON API. */

export interface InstanceState {
  instance_id: string;
  variant: string;
  pool_a: number;
  pool_b: number;
  wealth: number;
  wealth_floor: number;
  n: number;
  tests_done: number;
  rejections: number;
  sequence_no: number;
  created_at: string;
}

export interface QuoteRequest {
  family: string;
  null_value: number;
  alternative_kind: string;
  alternative_theta: number | null;
  sigma: number | null;
  effect_size: number;
  required_power: number;
}

export interface Quote {
  cost: number;
  level: number;
  n_after: number;
  stability_bound: number | null;
  /** State sequence the quote was computed against. */
  sequence_no: number;
}

export interface ExecuteResponse {
  rejected: boolean;
  level: number;
  cost: number;
  n_after: number;
  pool_a: number;
  pool_b: number;
  sequence_no: number;
  wealth_floor: number;
}

export interface LedgerEntry {
  sequence_no: number;
  cost: number;
  level: number;
  n_after: number;
  p_value: number;
  rejected: boolean;
  pool_a_after: number;
  pool_b_after: number;
}

export interface LedgerPage {
  entries: LedgerEntry[];
  total: number;
}

/** 422 body for requests no affordable cost can fund. */
export interface InfeasibleDetail {
  infeasible: true;
  max_cost: number;
}

/** 409 body for executes pinned to an outdated sequence. */
export interface StaleDetail {
  stale_sequence_no: number;
  current_sequence_no: number;
}
