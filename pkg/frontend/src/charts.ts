/** Hand-rolled SVG charts: horizontal bars, grouped pair bars, and a
 * scatter. No chart library: nodes carry data-* attributes so behavior
 * is testable and every displayed number stays verbatim. */

import { el, num, svgEl } from './format';

export interface BarDatum {
  label: string;
  value: number;
  cssClass?: string;
}

export function barChart(
  data: BarDatum[],
  opts: { onClick?: (label: string) => void; signed?: boolean } = {}
): HTMLElement {
  const root = el('div', { class: 'chart bar-chart' });
  const max = Math.max(1e-12, ...data.map((d) => Math.abs(d.value)));
  for (const d of data) {
    const row = el('div', { class: `bar-row ${d.cssClass ?? ''}`.trim(), 'data-label': d.label });
    const widthPct = (Math.abs(d.value) / max) * 100;
    const bar = el('div', { class: 'bar' + (d.value < 0 ? ' negative' : '') });
    bar.style.width = `${widthPct}%`;
    row.append(
      el('span', { class: 'bar-label' }, [d.label]),
      bar,
      num(d.value)
    );
    if (opts.onClick) {
      row.addEventListener('click', () => opts.onClick?.(d.label));
      row.classList.add('clickable');
    }
    root.append(row);
  }
  return root;
}

export interface PairDatum {
  label: string;
  a: number;
  b: number;
}

export function pairedBars(data: PairDatum[], seriesNames: [string, string]): HTMLElement {
  const root = el('div', { class: 'chart paired-bars' });
  const max = Math.max(1, ...data.flatMap((d) => [d.a, d.b]));
  const legend = el('div', { class: 'legend' }, [
    el('span', { class: 'swatch series-a' }),
    seriesNames[0],
    el('span', { class: 'swatch series-b' }),
    seriesNames[1],
  ]);
  root.append(legend);
  for (const d of data) {
    const row = el('div', { class: 'pair-row', 'data-label': d.label });
    const barA = el('div', { class: 'bar series-a' });
    barA.style.width = `${(d.a / max) * 100}%`;
    const barB = el('div', { class: 'bar series-b' });
    barB.style.width = `${(d.b / max) * 100}%`;
    row.append(
      el('span', { class: 'bar-label' }, [d.label]),
      el('div', { class: 'pair-bars' }, [barA, num(d.a, 'count-a'), barB, num(d.b, 'count-b')])
    );
    root.append(row);
  }
  return root;
}

export interface ScatterPoint {
  x: number;
  y: number;
  id: string;
  cssClass?: string;
  title?: string;
}

export function scatter(
  points: ScatterPoint[],
  opts: {
    width?: number;
    height?: number;
    xLabel: string;
    yLabel: string;
    onClick?: (id: string) => void;
  }
): HTMLElement {
  const width = opts.width ?? 560;
  const height = opts.height ?? 360;
  const pad = 40;
  const root = el('div', { class: 'chart scatter' });
  const svg = svgEl('svg', {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    role: 'img',
  });
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(0, ...xs);
  const xMax = Math.max(1e-9, ...xs);
  const yMin = Math.min(...ys, 0);
  const yMax = Math.max(...ys, 1e-9);
  const sx = (x: number) => pad + ((x - xMin) / (xMax - xMin || 1)) * (width - 2 * pad);
  const sy = (y: number) => height - pad - ((y - yMin) / (yMax - yMin || 1)) * (height - 2 * pad);

  svg.append(
    svgEl('line', { x1: String(pad), y1: String(height - pad), x2: String(width - pad), y2: String(height - pad), class: 'axis' }),
    svgEl('line', { x1: String(pad), y1: String(pad), x2: String(pad), y2: String(height - pad), class: 'axis' })
  );
  const xText = svgEl('text', { x: String(width / 2), y: String(height - 8), class: 'axis-label' });
  xText.textContent = opts.xLabel;
  const yText = svgEl('text', { x: '12', y: String(height / 2), class: 'axis-label' });
  yText.textContent = opts.yLabel;
  svg.append(xText, yText);

  for (const p of points) {
    const c = svgEl('circle', {
      cx: String(sx(p.x)),
      cy: String(sy(p.y)),
      r: '5',
      class: `point ${p.cssClass ?? ''}`.trim(),
      'data-id': p.id,
    });
    if (p.title) {
      const title = svgEl('title');
      title.textContent = p.title;
      c.append(title);
    }
    if (opts.onClick) {
      c.addEventListener('click', () => opts.onClick?.(p.id));
      c.classList.add('clickable');
    }
    svg.append(c);
  }
  root.append(svg);
  return root;
}
