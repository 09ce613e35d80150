// Shapes of the v1 service payloads consumed by the interface.

export type VariableRole = "intervention" | "outcome" | "exogenous" | "baseline_only";

export interface VariableMeta {
  name: string;
  role: VariableRole;
  binary: boolean;
}

export type Bound =
  | { kind: "binary" }
  | { kind: "continuous"; low: number; high: number };

export interface ModelMeta {
  version: string;
  variables: VariableMeta[];
  time_labels: number[];
  anchor_time: number;
  horizons: number[];
  sources: string[];
  targets: string[];
  bounds: Record<string, Bound>;
  manifest: Record<string, string>;
}

export type AnswerStatus =
  | "Estimate"
  | "NoDetectableEffect"
  | "NotSupported"
  | "InputImplausible";

export interface SimAnswer {
  status: AnswerStatus;
  message: string;
  value: number | null;
  interval: [number, number] | null;
  detail: Record<string, unknown>;
}

export type QueryMode = "forward" | "goal_seek";

export interface SimRequest {
  mode: QueryMode;
  baseline: Record<string, number>;
  source: string;
  target: string;
  horizon: number;
  forward_value?: number;
  desired_target?: number;
}
