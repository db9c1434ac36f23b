/** Dataset bias explorer: a correlation bar per feature (the sensitive
 * one in red); clicking a bar loads the per-category histogram split by
 * sensitive group and the group-1 share chart. */

import { api } from '../api';
import { barChart, pairedBars } from '../charts';
import { clear, el, num } from '../format';
import type { BiasSummary, FeatureHistogram } from '../types';

export async function datasetExplorer(
  container: HTMLElement,
  datasetId: string,
  sensitive: string,
  selectedFeature?: string
): Promise<void> {
  clear(container);
  const summary: BiasSummary = await api.bias(datasetId, sensitive);
  const header = el('div', { class: 'view-header' }, [
    el('h2', {}, [`Dataset ${summary.dataset_id}`]),
    el('p', { class: 'subtitle' }, [
      `sensitive: ${summary.sensitive_feature} (${summary.group_labels[0]} / ${summary.group_labels[1]}), `,
      'group sizes ',
      num(summary.n_group0),
      ' / ',
      num(summary.n_group1),
      ', excluded ',
      num(summary.n_excluded),
    ]),
  ]);

  const bars = barChart(
    summary.features.map((fb) => ({
      label: fb.feature,
      value: fb.correlation,
      cssClass:
        (fb.is_sensitive ? 'sensitive ' : '') + (fb.degenerate ? 'degenerate' : ''),
    })),
    {
      onClick: (feature) => {
        window.location.hash = `#/datasets/${datasetId}?sensitive=${sensitive}&feature=${encodeURIComponent(feature)}`;
      },
    }
  );
  const correlations = el('section', { class: 'panel correlations' }, [
    el('h3', {}, ['Correlation with the sensitive feature']),
    bars,
  ]);

  const detail = el('section', { class: 'panel feature-detail' });
  if (!selectedFeature) {
    detail.append(el('p', { class: 'empty-state' }, ['Click a feature bar for its group histogram.']));
  } else {
    const hist: FeatureHistogram = await api.histogram(datasetId, selectedFeature, sensitive);
    detail.append(
      el('h3', {}, [`${hist.feature} by group`]),
      el('p', { class: 'subtitle' }, ['correlation ', num(hist.correlation), hist.degenerate ? ' (degenerate)' : '']),
      pairedBars(
        hist.categories.map((c) => ({ label: c.label, a: c.count_group0, b: c.count_group1 })),
        [hist.group_labels[0], hist.group_labels[1]]
      ),
      el('h4', {}, [`Share of ${hist.group_labels[1]} per category`]),
      barChart(
        hist.categories.map((c) => ({
          label: c.label,
          value: c.share_group1 === null ? 0 : c.share_group1,
          cssClass: 'share' + (c.share_group1 === null ? ' undefined-share' : ''),
        }))
      )
    );
  }

  container.append(header, correlations, detail);
}
