/** Hash router: every view is reconstructible from the URL, so records,
 * sweeps, and remedies are deep-linkable. */

import { api } from './api';
import { clear, el } from './format';
import { datasetExplorer } from './views/datasetExplorer';
import { modelExplorer } from './views/modelExplorer';
import { workbench } from './views/workbench';

export function parseHash(hash: string): { path: string[]; params: URLSearchParams } {
  const stripped = hash.replace(/^#\/?/, '');
  const [pathPart, queryPart] = stripped.split('?');
  return {
    path: pathPart ? pathPart.split('/') : [],
    params: new URLSearchParams(queryPart ?? ''),
  };
}

export async function route(container: HTMLElement): Promise<void> {
  const { path, params } = parseHash(window.location.hash);
  try {
    if (path[0] === 'datasets' && path[1]) {
      await datasetExplorer(
        container,
        path[1],
        params.get('sensitive') ?? '',
        params.get('feature') ?? undefined
      );
      return;
    }
    if (path[0] === 'sweeps' && path[1]) {
      await modelExplorer(
        container,
        path[1],
        params.get('model') ?? undefined,
        params.has('depth') ? Number(params.get('depth')) : 4
      );
      return;
    }
    if (path[0] === 'models' && path[1]) {
      await workbench(container, path[1], params.get('remedy') ?? undefined);
      return;
    }
    await home(container);
  } catch (err) {
    clear(container);
    container.append(el('p', { class: 'error' }, [`failed to load view: ${String(err)}`]));
  }
}

async function home(container: HTMLElement): Promise<void> {
  clear(container);
  const body = await api.datasets();
  const list = el('ul', { class: 'dataset-list' });
  for (const ds of body.datasets) {
    for (const tag of ds.sensitive_tags) {
      const link = el('a', { href: `#/datasets/${ds.dataset_id}?sensitive=${tag}` }, [
        `${ds.dataset_id} (sensitive: ${tag})`,
      ]);
      list.append(el('li', {}, [link]));
    }
  }
  container.append(el('h2', {}, ['Datasets']), list);
}

export function start(): void {
  const container = document.getElementById('app');
  if (!container) throw new Error('missing #app container');
  const render = () => void route(container);
  window.addEventListener('hashchange', render);
  render();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  start();
}
