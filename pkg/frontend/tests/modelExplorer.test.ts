import { afterEach, describe, expect, it, vi } from 'vitest';

import { modelExplorer } from '../src/views/modelExplorer';
import { fixture, fixtureNumbers, installFetch, mount, renderedValues } from './helpers';

const sweepJob = fixture('sweep_job');
const sweepJobTree = fixture('sweep_job_tree');
const modelDetail = fixture('model_detail');
const treeDetail = fixture('model_detail_tree');
const treeDetailDepth1 = fixture('model_detail_tree_depth1');

const unfairId: string = sweepJob.result.selection.most_unfair;
const treeId: string = treeDetail.record.record_id;

function routes() {
  return installFetch([
    { method: 'GET', match: (p) => p === `/sweeps/${sweepJob.job_id}`, reply: () => sweepJob },
    { method: 'GET', match: (p) => p === `/sweeps/${sweepJobTree.job_id}`, reply: () => sweepJobTree },
    { method: 'GET', match: (p) => p === '/sweeps/empty-sweep', reply: () => ({
      job_id: 'empty-sweep', kind: 'sweep', status: 'done',
      result: { sweep_id: 's', record_ids: [], records: [], pareto_front: [], selection: null, skipped: [] },
    }) },
    { method: 'GET', match: (p) => p.startsWith(`/models/${unfairId}`), reply: () => modelDetail },
    {
      method: 'GET',
      match: (p) => p.startsWith(`/models/${treeId}`),
      reply: (p) => (p.includes('depth=1') ? treeDetailDepth1 : treeDetail),
    },
  ]);
}

afterEach(() => vi.unstubAllGlobals());

describe('model explorer', () => {
  it('plots every record and renders only fixture-backed numbers', async () => {
    routes();
    const app = mount();
    await modelExplorer(app, sweepJob.job_id);
    const points = app.querySelectorAll('svg .point');
    expect(points.length).toBe(sweepJob.result.records.length);
    const allowed = fixtureNumbers(sweepJob);
    for (const value of renderedValues(app)) {
      expect(allowed.has(value), `rendered ${value} not in fixture`).toBe(true);
    }
    // every record's accuracy and AOD are shown verbatim
    const rendered = new Set(renderedValues(app));
    for (const record of sweepJob.result.records) {
      expect(rendered.has(String(record.accuracy))).toBe(true);
      expect(rendered.has(String(record.aod))).toBe(true);
    }
  });

  it('highlights exactly the pareto-front points', async () => {
    routes();
    const app = mount();
    await modelExplorer(app, sweepJob.job_id);
    const flagged = new Set(
      Array.from(app.querySelectorAll('svg .point.pareto')).map((node) => node.getAttribute('data-id'))
    );
    expect(flagged).toEqual(new Set(sweepJob.result.pareto_front));
  });

  it('click-through shows the model detail whose record id matches the API', async () => {
    routes();
    const app = mount();
    await modelExplorer(app, sweepJob.job_id, unfairId);
    const heading = app.querySelector('.logic h3') as HTMLElement;
    expect(heading.textContent).toContain(modelDetail.record.record_id);
    const rendered = new Set(renderedValues(app));
    for (const weight of modelDetail.logic.weights) {
      expect(rendered.has(String(weight.raw))).toBe(true);
      expect(rendered.has(String(weight.adjusted))).toBe(true);
    }
  });

  it('depth selector truncates the displayed tree', async () => {
    routes();
    const app = mount();
    await modelExplorer(app, sweepJobTree.job_id, treeId, 1);
    expect(app.querySelector('.depth-selector input')).toBeTruthy();
    const hasTruncated = (node: any): boolean => {
      if (!node) return false;
      if (node.truncated) return true;
      return hasTruncated(node.left) || hasTruncated(node.right);
    };
    // the fixture really is truncated at depth 1, and the UI shows it
    expect(treeDetailDepth1.logic.trees.some(hasTruncated)).toBe(true);
    expect(app.querySelectorAll('.tree-leaf.truncated').length).toBeGreaterThan(0);

    const depth = (node: Element): number => {
      const children = node.querySelector(':scope > .tree-children');
      if (!children) return 0;
      return 1 + Math.max(...Array.from(children.children).map((child) => depth(child)));
    };
    const roots = Array.from(app.querySelectorAll('.tree-root > li'));
    expect(Math.max(...roots.map((r) => depth(r)))).toBeLessThanOrEqual(1);
  });

  it('empty sweep renders an empty-state message', async () => {
    routes();
    const app = mount();
    await modelExplorer(app, 'empty-sweep');
    expect(app.querySelector('.empty-state')?.textContent).toContain('no models');
  });
});
