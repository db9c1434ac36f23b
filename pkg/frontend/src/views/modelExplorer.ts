/** Model population explorer: the accuracy/AOD scatter with the Pareto
 * front highlighted; clicking a point shows that model's logic (weight
 * bars raw and std-adjusted, or the tree with a depth selector). */

import { api } from '../api';
import { barChart, scatter } from '../charts';
import { clear, el, num } from '../format';
import type { ModelDetail, SweepResult, TreeNodeDisplay } from '../types';

function treeNode(node: TreeNodeDisplay): HTMLElement {
  if (node.feature === undefined) {
    const leaf = el('li', { class: 'tree-leaf' + (node.truncated ? ' truncated' : '') });
    leaf.append(
      node.truncated ? '… class ' : 'class ',
      num(node.class ?? 0),
      ' confidence ',
      num(node.confidence ?? 0),
      ' (n=',
      num(node.n),
      ')'
    );
    return leaf;
  }
  const item = el('li', { class: 'tree-node' });
  item.append(el('span', { class: 'split' }, [`${node.feature} <= `, num(node.threshold ?? 0), ` (n=`, num(node.n), `)`]));
  const children = el('ul', { class: 'tree-children' });
  children.append(treeNode(node.left as TreeNodeDisplay), treeNode(node.right as TreeNodeDisplay));
  item.append(children);
  return item;
}

function logicPanel(detail: ModelDetail, onDepth: (depth: number) => void, depth: number): HTMLElement {
  const panel = el('section', { class: 'panel logic' });
  const record = detail.record;
  panel.append(
    el('h3', {}, [`Model ${record.record_id}`]),
    el('p', { class: 'subtitle' }, [
      `${record.kind}: accuracy `,
      num(record.accuracy),
      ', AOD ',
      num(record.aod),
      record.converged ? '' : ' (not converged)',
    ]),
    el('pre', { class: 'hyperparams' }, [JSON.stringify(record.hyperparams, null, 1)])
  );
  const logic = detail.logic;
  if (logic.weights) {
    panel.append(
      el('h4', {}, ['Raw weights']),
      barChart(logic.weights.map((w) => ({ label: w.feature, value: w.raw }))),
      el('h4', {}, ['Std-adjusted weights']),
      barChart(logic.weights.map((w) => ({ label: w.feature, value: w.adjusted }))),
      el('p', {}, ['intercept ', num(logic.intercept ?? 0)])
    );
  }
  if (logic.trees) {
    const selector = el('label', { class: 'depth-selector' }, ['display depth ']);
    const input = el('input', {
      type: 'number',
      min: '0',
      max: '12',
      value: String(depth),
      'data-role': 'depth',
    });
    input.addEventListener('change', () => onDepth(Number((input as HTMLInputElement).value)));
    selector.append(input);
    panel.append(el('h4', {}, [`Trees (${logic.trees.length})`]), selector);
    logic.trees.forEach((tree, i) => {
      panel.append(
        el('details', i === 0 ? { open: '' } : {}, [
          el('summary', {}, [`tree ${i}`]),
          el('ul', { class: 'tree-root' }, [treeNode(tree)]),
        ])
      );
    });
  }
  return panel;
}

export async function modelExplorer(
  container: HTMLElement,
  sweepId: string,
  selectedModel?: string,
  depth = 4
): Promise<void> {
  clear(container);
  const job = await api.sweep(sweepId);
  const header = el('div', { class: 'view-header' }, [el('h2', {}, [`Sweep ${sweepId}`])]);
  container.append(header);
  if (job.status !== 'done' || !job.result) {
    container.append(el('p', { class: 'empty-state' }, [`sweep status: ${job.status}`]));
    return;
  }
  const result: SweepResult = job.result;
  if (result.records.length === 0) {
    container.append(el('p', { class: 'empty-state' }, ['This sweep trained no models.']));
    return;
  }
  const front = new Set(result.pareto_front);
  const points = result.records.map((r) => ({
    x: r.aod,
    y: r.accuracy,
    id: r.record_id,
    cssClass:
      (front.has(r.record_id) ? 'pareto ' : '') +
      (r.record_id === selectedModel ? 'selected' : ''),
    title: `${r.record_id}: acc ${String(r.accuracy)}, aod ${String(r.aod)}`,
  }));
  const plot = scatter(points, {
    xLabel: 'AOD',
    yLabel: 'accuracy',
    onClick: (id) => {
      window.location.hash = `#/sweeps/${sweepId}?model=${id}`;
    },
  });
  const list = el('table', { class: 'records' });
  list.append(
    el('tr', {}, [el('th', {}, ['record']), el('th', {}, ['accuracy']), el('th', {}, ['AOD'])])
  );
  for (const r of result.records) {
    const row = el('tr', { 'data-record': r.record_id, class: front.has(r.record_id) ? 'pareto' : '' });
    row.append(
      el('td', {}, [r.record_id]),
      el('td', {}, [num(r.accuracy)]),
      el('td', {}, [num(r.aod)])
    );
    list.append(row);
  }
  container.append(
    el('section', { class: 'panel' }, [el('h3', {}, ['Accuracy vs AOD (Pareto front highlighted)']), plot, list])
  );

  if (selectedModel) {
    const detail = await api.model(selectedModel, depth);
    container.append(
      logicPanel(detail, (newDepth) => {
        void modelExplorer(container, sweepId, selectedModel, newDepth);
      }, depth)
    );
  } else {
    container.append(el('p', { class: 'empty-state' }, ['Click a point to inspect that model.']));
  }
}
