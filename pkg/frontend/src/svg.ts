/** Minimal deterministic SVG assembly: fixed number formatting, no RNG. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate ${x}`)
  return x.toFixed(3).replace(/\.000$/, '')
}

export interface Scale {
  (x: number): number
  domain: [number, number]
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain
  const [r0, r1] = range
  const span = d1 - d0 || 1
  const scale = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale
  scale.domain = domain
  return scale
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain
  if (d0 <= 0 || d1 <= 0) throw new Error('log scale needs positive domain')
  const inner = linearScale([Math.log10(d0), Math.log10(d1)], range)
  const scale = ((x: number) => inner(Math.log10(x))) as Scale
  scale.domain = domain
  return scale
}

export function extent(values: number[], pad = 0): [number, number] {
  let lo = Infinity
  let hi = -Infinity
  for (const v of values) {
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  if (!Number.isFinite(lo)) throw new Error('empty extent')
  const span = hi - lo || Math.abs(hi) || 1
  return [lo - pad * span, hi + pad * span]
}

export const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b']

export class SvgDoc {
  readonly width: number
  readonly height: number
  private parts: string[] = []

  constructor(width: number, height: number) {
    this.width = width
    this.height = height
  }

  add(part: string): void {
    this.parts.push(part)
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${style}/>`,
    )
  }

  path(points: Array<[number, number]>, style: string): void {
    const d = points
      .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${fmt(x)} ${fmt(y)}`)
      .join(' ')
    this.add(`<path d="${d}" fill="none" ${style}/>`)
  }

  circle(cx: number, cy: number, r: number, style: string): void {
    this.add(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" ${style}/>`)
  }

  rect(x: number, y: number, w: number, h: number, style: string): void {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ${style}/>`,
    )
  }

  text(x: number, y: number, content: string, style = ''): void {
    const safe = content
      .replace(/&/g, '&amp;')
      .replace(/</g, '&lt;')
      .replace(/>/g, '&gt;')
    this.add(`<text x="${fmt(x)}" y="${fmt(y)}" ${style}>${safe}</text>`)
  }

  render(): string {
    return [
      '<?xml version="1.0" encoding="UTF-8"?>',
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
        `viewBox="0 0 ${this.width} ${this.height}" font-family="sans-serif" font-size="11">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      '</svg>',
      '',
    ].join('\n')
  }
}

export interface Panel {
  x0: number
  y0: number
  w: number
  h: number
}

export function panelGrid(
  rows: number,
  cols: number,
  width: number,
  height: number,
  margin = { top: 36, right: 16, bottom: 44, left: 56, gapX: 22, gapY: 34 },
): Panel[][] {
  const w = (width - margin.left - margin.right - (cols - 1) * margin.gapX) / cols
  const h = (height - margin.top - margin.bottom - (rows - 1) * margin.gapY) / rows
  const out: Panel[][] = []
  for (let r = 0; r < rows; r++) {
    const rowPanels: Panel[] = []
    for (let c = 0; c < cols; c++) {
      rowPanels.push({
        x0: margin.left + c * (w + margin.gapX),
        y0: margin.top + r * (h + margin.gapY),
        w,
        h,
      })
    }
    out.push(rowPanels)
  }
  return out
}

export function drawFrame(doc: SvgDoc, p: Panel, title: string): void {
  doc.rect(p.x0, p.y0, p.w, p.h, 'fill="none" stroke="#888" stroke-width="0.8"')
  doc.text(p.x0 + p.w / 2, p.y0 - 6, title, 'text-anchor="middle" font-weight="bold"')
}

export function axisTicksLinear(lo: number, hi: number, count = 5): number[] {
  const step = (hi - lo) / (count - 1)
  return Array.from({ length: count }, (_, i) => lo + i * step)
}

export function axisTicksLog(lo: number, hi: number): number[] {
  const out: number[] = []
  const first = Math.ceil(Math.log10(lo))
  const last = Math.floor(Math.log10(hi))
  for (let e = first; e <= last; e++) out.push(10 ** e)
  if (out.length === 0) out.push(lo, hi)
  return out
}
