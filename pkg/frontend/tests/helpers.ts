import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { vi } from 'vitest';

const FIXTURES = join(__dirname, 'fixtures');

export function fixture<T = any>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), 'utf-8')) as T;
}

export interface Route {
  method: 'GET' | 'POST';
  match: (path: string, body?: any) => boolean;
  reply: (path: string, body?: any) => unknown;
}

export function installFetch(routes: Route[]): { calls: { method: string; path: string; body?: any }[] } {
  (window as any).FAIRLENS_API = 'http://api.test';
  const calls: { method: string; path: string; body?: any }[] = [];
  vi.stubGlobal('fetch', async (url: string, init?: RequestInit) => {
    const path = String(url).replace('http://api.test', '');
    const method = (init?.method ?? 'GET') as 'GET' | 'POST';
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, path, body });
    for (const route of routes) {
      if (route.method === method && route.match(path, body)) {
        return {
          ok: true,
          status: 200,
          json: async () => route.reply(path, body),
        } as Response;
      }
    }
    throw new Error(`no mock route for ${method} ${path}`);
  });
  return { calls };
}

export function mount(): HTMLElement {
  document.body.innerHTML = '<main id="app"></main>';
  return document.getElementById('app') as HTMLElement;
}

/** All [data-value] nodes: what the user sees must equal the tagged value. */
export function renderedValues(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll('[data-value]')).map((node) => {
    const tagged = node.getAttribute('data-value') as string;
    if (node.textContent !== tagged) {
      throw new Error(`rendered text ${JSON.stringify(node.textContent)} != data-value ${tagged}`);
    }
    return tagged;
  });
}

/** Every number in a fixture, rendered the way the UI must render it. */
export function fixtureNumbers(obj: unknown, out = new Set<string>()): Set<string> {
  if (typeof obj === 'number') {
    out.add(String(obj));
  } else if (Array.isArray(obj)) {
    for (const item of obj) fixtureNumbers(item, out);
  } else if (obj !== null && typeof obj === 'object') {
    for (const value of Object.values(obj)) fixtureNumbers(value, out);
  } else if (obj === null) {
    out.add('n/a');
  }
  return out;
}

export async function flush(): Promise<void> {
  for (let i = 0; i < 20; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
