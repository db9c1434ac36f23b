/** Explanation and remedy workbench: the prediction-probability scatter
 * with counterfactual points in red, per-point surrogate explanations,
 * a point editor for what-if probes, and the mask builder that triggers
 * a retrain and renders the before/after comparison card. */

import { api, pollJob } from '../api';
import { barChart, scatter } from '../charts';
import { clear, el, num } from '../format';
import type {
  DatasetDetail,
  ExplainResponse,
  MaskJson,
  Predictions,
  RemedyResult,
} from '../types';

let currentRemedyToken = 0;

function explanationPanel(target: HTMLElement, response: ExplainResponse): void {
  clear(target);
  const expl = response.explanation;
  target.append(
    el('h4', {}, [
      response.row_index === null ? 'Explanation (custom point)' : `Explanation for row `,
      ...(response.row_index === null ? [] : [num(response.row_index)]),
    ]),
    el('p', { class: 'subtitle' }, [
      'fidelity R² ',
      num(expl.fidelity_r2),
      ', intercept ',
      num(expl.intercept),
      ', local prediction ',
      num(expl.local_prediction),
      expl.degenerate ? ' (degenerate fit)' : '',
    ]),
    barChart(expl.entries.map((e) => ({ label: e.condition, value: e.weight })))
  );
}

function comparisonCard(result: RemedyResult): HTMLElement {
  const card = el('section', { class: 'panel comparison' });
  card.append(el('h3', {}, ['Before / after retraining on masked data']));
  const table = el('table', { class: 'comparison-table' });
  table.append(
    el('tr', {}, [
      el('th', {}, ['metric']),
      el('th', {}, ['unmasked']),
      el('th', {}, ['masked']),
    ])
  );
  const rows: [string, number, number][] = [
    ['score', result.unmasked_score, result.masked_score],
    ['AOD', result.unmasked_aod, result.masked_aod],
    ['group score', result.unmasked_group, result.masked_group],
    ['causal score', result.unmasked_causal, result.masked_causal],
  ];
  for (const [label, before, after] of rows) {
    table.append(
      el('tr', { 'data-metric': label }, [
        el('td', {}, [label]),
        el('td', { class: 'before' }, [num(before)]),
        el('td', { class: 'after' }, [num(after)]),
      ])
    );
  }
  card.append(table, el('p', { class: 'subtitle' }, [`remedied model: ${result.remedied_record_id}`]));
  return card;
}

function maskBuilder(
  dataset: DatasetDetail,
  prefill: MaskJson,
  onRetrain: (mask: MaskJson, seed: number) => void
): HTMLElement {
  const panel = el('section', { class: 'panel mask-builder' });
  panel.append(el('h3', {}, ['Mask builder']));
  const state: MaskJson = { ...prefill };

  const list = el('div', { class: 'mask-entries' });

  const render = () => {
    clear(list);
    for (const [feature, rule] of Object.entries(state)) {
      const desc =
        rule === 'all'
          ? 'all values'
          : 'categories' in (rule as object)
            ? (rule as { categories: string[] }).categories.join(', ')
            : JSON.stringify((rule as { range: [number, number] }).range);
      const entry = el('div', { class: 'mask-entry', 'data-feature': feature }, [
        `${feature}: ${desc} `,
      ]);
      const remove = el('button', { type: 'button', 'data-role': 'remove-mask' }, ['remove']);
      remove.addEventListener('click', () => {
        delete state[feature];
        render();
      });
      entry.append(remove);
      list.append(entry);
    }
    if (Object.keys(state).length === 0) {
      list.append(el('p', { class: 'empty-state' }, ['Empty mask: retraining reproduces the model.']));
    }
  };
  render();

  const featureSelect = el('select', { 'data-role': 'mask-feature' });
  for (const f of dataset.schema.features) {
    featureSelect.append(el('option', { value: f.name }, [f.name]));
  }
  const categoryInput = el('input', {
    type: 'text',
    'data-role': 'mask-categories',
    placeholder: 'categories (comma-sep) or "all"',
  });
  const addButton = el('button', { type: 'button', 'data-role': 'add-mask' }, ['add']);
  addButton.addEventListener('click', () => {
    const feature = (featureSelect as HTMLSelectElement).value;
    const raw = (categoryInput as HTMLInputElement).value.trim();
    if (!raw || raw === 'all') {
      state[feature] = 'all';
    } else {
      state[feature] = { categories: raw.split(',').map((c) => c.trim()) };
    }
    render();
  });

  const seedInput = el('input', { type: 'number', value: '9', 'data-role': 'remedy-seed' });
  const retrain = el('button', { type: 'button', 'data-role': 'retrain' }, ['retrain with mask']);
  retrain.addEventListener('click', () => {
    onRetrain({ ...state }, Number((seedInput as HTMLInputElement).value));
  });

  panel.append(
    list,
    el('div', { class: 'mask-controls' }, [featureSelect, categoryInput, addButton]),
    el('div', { class: 'mask-controls' }, ['seed ', seedInput, retrain])
  );
  return panel;
}

function pointEditor(
  dataset: DatasetDetail,
  onExplain: (row: number[], seed: number) => void
): HTMLElement {
  const panel = el('section', { class: 'panel point-editor' });
  panel.append(el('h3', {}, ['Explain any point']));
  const inputs: HTMLElement[] = [];
  for (const f of dataset.schema.features) {
    if (f.kind === 'categorical') {
      const select = el('select', { 'data-feature': f.name });
      (f.categories ?? []).forEach((name, code) => {
        select.append(el('option', { value: String(code) }, [name]));
      });
      inputs.push(el('label', {}, [f.name, ' ', select]));
    } else {
      inputs.push(
        el('label', {}, [f.name, ' ', el('input', { type: 'number', value: '0', 'data-feature': f.name })])
      );
    }
  }
  const seedInput = el('input', { type: 'number', value: '11', 'data-role': 'explain-seed' });
  const button = el('button', { type: 'button', 'data-role': 'explain-point' }, ['explain point']);
  button.addEventListener('click', () => {
    const row = dataset.schema.features.map((f) => {
      const node = panel.querySelector(`[data-feature="${f.name}"]`) as
        | HTMLInputElement
        | HTMLSelectElement;
      return Number(node.value);
    });
    onExplain(row, Number((seedInput as HTMLInputElement).value));
  });
  panel.append(...inputs, el('div', {}, ['seed ', seedInput, button]));
  return panel;
}

export async function workbench(
  container: HTMLElement,
  modelId: string,
  remedyId?: string
): Promise<void> {
  clear(container);
  const detail = await api.model(modelId);
  const dataset = await api.dataset(detail.record.dataset_id);
  const predictions: Predictions = await api.predictions(modelId);

  container.append(
    el('div', { class: 'view-header' }, [
      el('h2', {}, [`Workbench: ${modelId}`]),
      el('p', { class: 'subtitle' }, [
        `accuracy `,
        num(detail.record.accuracy),
        ', AOD ',
        num(detail.record.aod),
        ', counterfactual rows in red',
      ]),
    ])
  );

  const explTarget = el('section', { class: 'panel explanation' }, [
    el('p', { class: 'empty-state' }, ['Click a point to explain it.']),
  ]);

  const points = predictions.rows.map((row) => ({
    x: row.index,
    y: row.probability,
    id: String(row.index),
    cssClass: row.counterfactual ? 'counterfactual' : '',
    title: `row ${row.index}: p=${String(row.probability)}`,
  }));
  const plot = scatter(points, {
    xLabel: 'row index',
    yLabel: 'predicted probability',
    onClick: (id) => {
      void api
        .explainIndex(modelId, Number(id), 11)
        .then((resp) => explanationPanel(explTarget, resp));
    },
  });
  container.append(
    el('section', { class: 'panel' }, [el('h3', {}, ['Prediction probabilities']), plot]),
    explTarget,
    pointEditor(dataset, (row, seed) => {
      void api.explainRow(modelId, row, seed).then((resp) => explanationPanel(explTarget, resp));
    })
  );

  let prefill: MaskJson = {};
  try {
    const suggested = await api.suggestedMasks(modelId);
    if (suggested.suggestions.length > 0) {
      prefill = suggested.suggestions[0].mask as MaskJson;
    }
  } catch {
    prefill = {};
  }

  const remedyTarget = el('div', { class: 'remedy-target' });
  container.append(
    maskBuilder(dataset, prefill, (mask, seed) => {
      const token = ++currentRemedyToken;
      clear(remedyTarget);
      remedyTarget.append(el('p', { class: 'empty-state' }, ['retraining…']));
      void api
        .startRemedy(modelId, mask, seed)
        .then((job) =>
          job.status === 'done'
            ? job
            : pollJob<RemedyResult>('remedies', job.job_id as string, () => token !== currentRemedyToken)
        )
        .then((job) => {
          if (!job || token !== currentRemedyToken) return; // stale poll discarded
          clear(remedyTarget);
          if (job.status === 'done' && job.result) {
            const result = job.result;
            window.location.hash = `#/models/${modelId}?remedy=${result.remedy_id ?? ''}`;
            remedyTarget.append(comparisonCard(result));
          } else {
            remedyTarget.append(el('p', { class: 'error' }, [`remedy failed: ${job.error ?? 'unknown'}`]));
          }
        });
    }),
    remedyTarget
  );

  if (remedyId) {
    const job = await api.remedy(remedyId);
    if (job.status === 'done' && job.result) {
      clear(remedyTarget);
      remedyTarget.append(comparisonCard(job.result));
    }
  }
}
