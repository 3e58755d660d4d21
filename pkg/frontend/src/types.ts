/** Wire types mirroring the rating server's report bundle schema (v1). */

export interface MetricDef {
  key: string;
  display_name: string;
  group: string;
  direction: number;
  unit: string;
  weight: number;
  optional: boolean;
}

export interface ReferenceBinding {
  task: string;
  dataset: string;
  environment: string;
  experiment: string;
}

export interface SchemeInfo {
  bins: number[];
  metrics: MetricDef[];
  references: ReferenceBinding[];
}

export interface ExperimentEntry {
  id: string;
  task: string;
  dataset: string;
  method: string;
  environment: string;
  reference: boolean;
  compound: string;
  values: Record<string, number>;
  index_scores: Record<string, number>;
  ratings: Record<string, string>;
  flags: string[];
  dataset_size?: number;
  hyperparameters?: Record<string, unknown>;
}

export interface ScatterPoint {
  id: string;
  dataset: string;
  method: string;
  environment: string;
  x: number;
  y: number;
  x_value: number;
  y_value: number;
  compound: string;
  reference: boolean;
}

export interface ScatterSeries {
  x_metric: string;
  y_metric: string;
  boundaries: number[];
  points: ScatterPoint[];
}

export interface BestRow {
  dataset: string;
  dataset_size: number | null;
  method: string;
  experiment: string;
  environment: string;
  compound: string;
  metrics: Record<string, { value: number; index: number; rating: string }>;
}

export interface Bundle {
  schema_version: number;
  scheme_hash: string;
  scheme: SchemeInfo;
  experiments: ExperimentEntry[];
  best_per_dataset: BestRow[];
  scatter: ScatterSeries;
  distributions: {
    by_dataset: Record<string, Record<string, number>>;
    by_method: Record<string, Record<string, number>>;
  };
}

export interface RateRequest {
  weights: Record<string, number>;
  bins: number[];
  references: ReferenceBinding[];
}

export interface FieldError {
  field: string;
  message: string;
}

export const RATING_LETTERS = ["A", "B", "C", "D", "E"] as const;
