import type {
  BiasSummary,
  DatasetDetail,
  ExplainResponse,
  FeatureHistogram,
  Job,
  MaskJson,
  MaskSuggestion,
  ModelDetail,
  ModelRecord,
  Predictions,
  RemedyResult,
  SweepResult,
} from './types';

declare global {
  interface Window {
    FAIRLENS_API?: string;
  }
}

export function apiBase(): string {
  if (typeof window !== 'undefined' && window.FAIRLENS_API) return window.FAIRLENS_API;
  return 'http://localhost:8000';
}

async function getJson<T>(path: string): Promise<T> {
  const resp = await fetch(`${apiBase()}${path}`);
  if (!resp.ok) throw new Error(`GET ${path}: ${resp.status}`);
  return (await resp.json()) as T;
}

async function postJson<T>(path: string, body: unknown): Promise<T> {
  const resp = await fetch(`${apiBase()}${path}`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
  if (!resp.ok) throw new Error(`POST ${path}: ${resp.status}`);
  return (await resp.json()) as T;
}

export const api = {
  datasets: () => getJson<{ datasets: { dataset_id: string; sensitive_tags: string[] }[] }>('/datasets'),
  dataset: (id: string) => getJson<DatasetDetail>(`/datasets/${id}`),
  bias: (id: string, sensitive: string) =>
    getJson<BiasSummary>(`/datasets/${id}/bias?sensitive=${encodeURIComponent(sensitive)}`),
  histogram: (id: string, feature: string, sensitive: string) =>
    getJson<FeatureHistogram>(
      `/datasets/${id}/features/${encodeURIComponent(feature)}/histogram?sensitive=${encodeURIComponent(sensitive)}`
    ),
  sweep: (id: string) => getJson<Job<SweepResult>>(`/sweeps/${id}`),
  models: (dataset?: string) =>
    getJson<{ models: ModelRecord[] }>(`/models${dataset ? `?dataset=${encodeURIComponent(dataset)}` : ''}`),
  model: (id: string, depth?: number) =>
    getJson<ModelDetail>(`/models/${id}${depth !== undefined ? `?depth=${depth}` : ''}`),
  predictions: (id: string) => getJson<Predictions>(`/models/${id}/predictions`),
  explainIndex: (id: string, rowIndex: number, seed: number, nSamples = 2000) =>
    postJson<ExplainResponse>(`/models/${id}/explain`, {
      row_index: rowIndex,
      config: { n_samples: nSamples, seed },
    }),
  explainRow: (id: string, row: number[], seed: number, nSamples = 2000) =>
    postJson<ExplainResponse>(`/models/${id}/explain`, {
      row,
      config: { n_samples: nSamples, seed },
    }),
  suggestedMasks: (id: string) =>
    getJson<{ suggestions: MaskSuggestion[] }>(`/models/${id}/suggested-masks`),
  startRemedy: (modelId: string, mask: MaskJson, seed: number, themisN = 2000) =>
    postJson<Job<RemedyResult>>('/remedies', { model_id: modelId, mask, seed, themis_n: themisN }),
  remedy: (id: string) => getJson<Job<RemedyResult>>(`/remedies/${id}`),
};

export async function pollJob<T>(
  kind: 'sweeps' | 'remedies',
  jobId: string,
  isStale: () => boolean,
  intervalMs = 400,
  maxTries = 600
): Promise<Job<T> | null> {
  for (let i = 0; i < maxTries; i += 1) {
    const job = await getJson<Job<T>>(`/${kind}/${jobId}`);
    if (isStale()) return null; // a newer request superseded this poll
    if (job.status === 'done' || job.status === 'failed') return job;
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
  throw new Error(`job ${jobId} did not finish`);
}
