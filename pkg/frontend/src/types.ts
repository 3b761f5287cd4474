/**
 * Types mirroring the service's JSON payloads.
 *
 * All real numbers arrive as strings (full-precision or display-rounded);
 * the UI renders them verbatim and never recomputes or re-rounds.
 */

export interface ErrorInfo {
  code: string;
  message: string;
}

export interface Envelope<T> {
  request_id: string;
  payload: T | null;
  error: ErrorInfo | null;
}

export type Role = "viewer" | "participant" | "moderator";

export interface QuantityStats {
  median: string;
  mean: string;
  min: string;
  max: string;
  ratio: string;
  reached: boolean;
}

export interface ConsensusReport {
  round_number: number;
  theta: string;
  delta: string;
  overall_reached: boolean;
  per_quantity: Record<string, QuantityStats>;
}

export interface SessionView {
  session_id: string;
  state: "open" | "round-active" | "deadlocked" | "finalized";
  round_count: number;
  active_round: number | null;
  missing_count: number;
  theta: string | number;
  delta: string | number;
  max_rounds: number;
  quantities: string[];
  participant_count: number;
  version?: number;
  last_report?: ConsensusReport | null;
  final_estimates?: Record<string, string>;
}

export interface MyEstimates {
  current_round: Record<string, string>;
  carried_defaults: Record<string, string>;
}

export interface SnapshotDoc {
  snapshot_id: string;
  org_id: string;
  alpha: string;
  levels: Record<string, string>;
  classifications: Record<string, string>;
  grl: string;
  risks: { id: string; name: string; likelihood: string }[];
}

export interface EvaluationValues {
  levels: Record<string, string>;
  crrs: Record<string, string>;
  residuals: Record<string, string>;
  grl_before: string;
  grl_after: string;
  grr: string;
}

export interface EvaluationDisplay extends EvaluationValues {
  mode: string;
  reduction_percent: string;
}

export interface EvaluationPayload {
  plan: string[];
  total_cost: string;
  alpha: string;
  treated: string[];
  feasible: boolean;
  classifications: Record<string, string>;
  values: EvaluationValues;
  display: EvaluationDisplay;
}

export interface CatalogDoc {
  countermeasures: { id: string; name: string; tags: string[]; cost: string }[];
}
