export interface CategoryStat {
  label: string;
  count_group0: number;
  count_group1: number;
  share_group1: number | null;
}

export interface FeatureBias {
  feature: string;
  correlation: number;
  degenerate: boolean;
  is_sensitive: boolean;
  categories: CategoryStat[];
}

export interface BiasSummary {
  dataset_id: string;
  sensitive_feature: string;
  group_labels: [string, string];
  n_group0: number;
  n_group1: number;
  n_excluded: number;
  features: FeatureBias[];
}

export interface FeatureHistogram extends FeatureBias {
  dataset_id: string;
  group_labels: [string, string];
}

export interface FeatureSchema {
  name: string;
  kind: 'numerical' | 'categorical';
  categories?: string[];
}

export interface DatasetDetail {
  dataset_id: string;
  n_rows: number;
  schema: {
    dataset_id: string;
    features: FeatureSchema[];
    label: { name: string; positive_meaning: string; negative_meaning: string };
  };
  sensitive_tags: string[];
}

export interface ModelRecord {
  record_id: string;
  kind: string;
  hyperparams: Record<string, unknown>;
  dataset_id: string;
  sensitive_tag: string;
  accuracy: number;
  aod_signed: number;
  aod: number;
  train_seed: number;
  group_score: number | null;
  causal_score: number | null;
  converged: boolean;
}

export interface WeightEntry {
  feature: string;
  raw: number;
  adjusted: number;
}

export interface TreeNodeDisplay {
  feature?: string;
  threshold?: number;
  n: number;
  left?: TreeNodeDisplay;
  right?: TreeNodeDisplay;
  class?: number;
  confidence?: number;
  positive_fraction?: number;
  truncated?: boolean;
}

export interface ModelLogic {
  kind: string;
  weights?: WeightEntry[];
  intercept?: number;
  trees?: TreeNodeDisplay[];
}

export interface ModelDetail {
  record: ModelRecord;
  logic: ModelLogic;
}

export interface SweepResult {
  sweep_id: string;
  record_ids: string[];
  records: ModelRecord[];
  pareto_front: string[];
  selection: { most_unfair: string; most_accurate: string; most_fair: string } | null;
  skipped: { index: number; error: string }[];
}

export interface Job<T> {
  job_id: string | null;
  kind: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  result?: T;
  error?: string;
}

export interface PredictionRow {
  index: number;
  probability: number;
  predicted: number;
  label: number;
  group: number | null;
  counterfactual: boolean;
}

export interface Predictions {
  dataset_id: string;
  model_id: string;
  rows: PredictionRow[];
}

export interface ExplanationEntry {
  feature: string;
  condition: string;
  weight: number;
}

export interface Explanation {
  entries: ExplanationEntry[];
  intercept: number;
  local_prediction: number;
  fidelity_r2: number;
  degenerate: boolean;
}

export interface ExplainResponse {
  model_id: string;
  row_index: number | null;
  explanation: Explanation;
}

export interface MaskSuggestion {
  feature: string;
  category: string;
  mask: Record<string, unknown>;
  importance: number;
  share_deviation: number;
  score: number;
}

export interface RemedyResult {
  remedy_id?: string;
  base_record_id: string;
  remedied_record_id: string;
  mask: Record<string, unknown>;
  unmasked_score: number;
  masked_score: number;
  unmasked_aod: number;
  masked_aod: number;
  unmasked_group: number;
  masked_group: number;
  unmasked_causal: number;
  masked_causal: number;
}

export type MaskJson = Record<string, 'all' | { categories: string[] } | { range: [number, number] }>;
