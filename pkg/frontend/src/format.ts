/** DOM helpers. Every number shown to the user goes through `num`,
 * which renders the API value verbatim (String(v)) and tags the node
 * with data-value so tests can assert byte-equality with the API. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = []
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === 'class') node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function num(value: number | null, extraClass = ''): HTMLSpanElement {
  const text = value === null ? 'n/a' : String(value);
  const span = el('span', { class: `value ${extraClass}`.trim() }, [text]);
  span.setAttribute('data-value', text);
  return span;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

const SVG_NS = 'http://www.w3.org/2000/svg';

export function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}
