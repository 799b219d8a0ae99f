import { writeFileSync } from 'fs'
import { loadCsv, numeric, Row } from './csv.js'
import {
  axisTicksLinear,
  axisTicksLog,
  drawFrame,
  extent,
  fmt,
  linearScale,
  logScale,
  PALETTE,
  panelGrid,
  SvgDoc,
} from './svg.js'

export type FigureKind = 'fig1' | 'fig2_rates' | 'fig2_eigfuns' | 'fig3'

export interface FigureRequest {
  figure: FigureKind
  input: string
  output: string
  /** spectrum.csv with a `mu` column; gives fig1 its reference lines */
  reference?: string
  /** slopes.csv for the rates figure annotations */
  slopes?: string
  /** repetition shown in the model-selection chart */
  repetition?: number
}

const uniq = (vals: string[]) => [...new Set(vals)]

/** Eigenvalue distributions: one rug panel per (method, kernel), with
 *  vertical lines at the supplied true eigenvalues. */
function renderFig1(req: FigureRequest): string {
  const rows = loadCsv(req.input, [
    'trial', 'method', 'kernel_id', 'lambda_re', 'lambda_im',
  ])
  const mus: number[] = req.reference
    ? loadCsv(req.reference, ['mu']).map((r) => numeric(r, 'mu'))
    : []
  const methods = uniq(rows.map((r) => r.method))
  const kernels = uniq(rows.map((r) => r.kernel_id))
  const doc = new SvgDoc(320 * kernels.length, 220 * methods.length)
  const grid = panelGrid(methods.length, kernels.length, doc.width, doc.height)
  const reVals = rows.map((r) => numeric(r, 'lambda_re'))
  const domain = extent(reVals.concat(mus), 0.08)
  methods.forEach((method, mi) => {
    kernels.forEach((kernel, ki) => {
      const p = grid[mi][ki]
      drawFrame(doc, p, `${method} / ${kernel}`)
      const sx = linearScale(domain, [p.x0, p.x0 + p.w])
      for (const mu of mus) {
        doc.line(sx(mu), p.y0, sx(mu), p.y0 + p.h,
          'stroke="#d62728" stroke-width="1" stroke-dasharray="4 3"')
      }
      const sub = rows.filter((r) => r.method === method && r.kernel_id === kernel)
      const trials = uniq(sub.map((r) => r.trial))
      const sy = linearScale([0, Math.max(trials.length - 1, 1)],
        [p.y0 + p.h - 14, p.y0 + 14])
      for (const r of sub) {
        const y = sy(trials.indexOf(r.trial))
        const x = sx(numeric(r, 'lambda_re'))
        doc.line(x, y - 4, x, y + 4, 'stroke="#1f77b4" stroke-width="1.4"')
      }
      for (const t of axisTicksLinear(domain[0], domain[1], 5)) {
        doc.line(sx(t), p.y0 + p.h, sx(t), p.y0 + p.h + 4, 'stroke="#444"')
        doc.text(sx(t), p.y0 + p.h + 16, t.toFixed(2), 'text-anchor="middle"')
      }
      doc.text(p.x0 + p.w / 2, p.y0 + p.h + 32, 'Re(lambda)',
        'text-anchor="middle"')
    })
  })
  return doc.render()
}

/** Log-log eigenvalue-error decay: per-trial points, slope annotated from
 *  the slopes CSV (never re-fitted here). */
function renderRates(req: FigureRequest): string {
  const rows = loadCsv(req.input, ['n', 'trial', 'method', 'i', 'eigenvalue_err'])
  const slopes = req.slopes
    ? loadCsv(req.slopes, ['method', 'i', 'eigenvalue_slope'])
    : []
  const methods = uniq(rows.map((r) => r.method))
  const indices = uniq(rows.map((r) => r.i)).sort()
  const doc = new SvgDoc(360 * methods.length, 300)
  const grid = panelGrid(1, methods.length, doc.width, doc.height)
  const ns = rows.map((r) => numeric(r, 'n'))
  const errs = rows.map((r) => numeric(r, 'eigenvalue_err')).filter((e) => e > 0)
  if (errs.length === 0) throw new Error('all eigenvalue errors are zero')
  const xDomain: [number, number] = [Math.min(...ns) / 1.2, Math.max(...ns) * 1.2]
  const yDomain: [number, number] = [Math.min(...errs) / 1.5, Math.max(...errs) * 1.5]
  methods.forEach((method, mi) => {
    const p = grid[0][mi]
    drawFrame(doc, p, method)
    const sx = logScale(xDomain, [p.x0, p.x0 + p.w])
    const sy = logScale(yDomain, [p.y0 + p.h, p.y0])
    for (const t of axisTicksLog(...xDomain)) {
      doc.line(sx(t), p.y0 + p.h, sx(t), p.y0 + p.h + 4, 'stroke="#444"')
      doc.text(sx(t), p.y0 + p.h + 16, String(t), 'text-anchor="middle"')
    }
    for (const t of axisTicksLog(...yDomain)) {
      doc.line(p.x0 - 4, sy(t), p.x0, sy(t), 'stroke="#444"')
      doc.text(p.x0 - 6, sy(t) + 3, t.toExponential(0), 'text-anchor="end"')
    }
    indices.forEach((idx, ci) => {
      const color = PALETTE[ci % PALETTE.length]
      for (const r of rows) {
        if (r.method !== method || r.i !== idx) continue
        const e = numeric(r, 'eigenvalue_err')
        if (e <= 0) continue
        doc.circle(sx(numeric(r, 'n')), sy(e), 2,
          `fill="${color}" fill-opacity="0.55"`)
      }
      const slopeRow = slopes.find((s) => s.method === method && s.i === idx)
      const label = slopeRow
        ? `i=${idx}: slope ${numeric(slopeRow, 'eigenvalue_slope').toFixed(3)}`
        : `i=${idx}`
      doc.text(p.x0 + 8, p.y0 + 14 + 13 * ci, label, `fill="${color}"`)
    })
    doc.text(p.x0 + p.w / 2, p.y0 + p.h + 32, 'n', 'text-anchor="middle"')
  })
  return doc.render()
}

/** Estimated (already normalized and aligned) eigenfunctions vs ground truth. */
function renderEigfuns(req: FigureRequest): string {
  const rows = loadCsv(req.input, ['method', 'i', 'x', 'f_ref', 'f_est_re'])
  const methods = uniq(rows.map((r) => r.method))
  const indices = uniq(rows.map((r) => r.i)).sort()
  const doc = new SvgDoc(240 * indices.length, 190 * methods.length)
  const grid = panelGrid(methods.length, indices.length, doc.width, doc.height)
  const xDomain = extent(rows.map((r) => numeric(r, 'x')))
  const yDomain = extent(
    rows.map((r) => numeric(r, 'f_ref')).concat(rows.map((r) => numeric(r, 'f_est_re'))),
    0.05,
  )
  methods.forEach((method, mi) => {
    indices.forEach((idx, ii) => {
      const p = grid[mi][ii]
      drawFrame(doc, p, `${method} / f_${idx}`)
      const sx = linearScale(xDomain, [p.x0, p.x0 + p.w])
      const sy = linearScale(yDomain, [p.y0 + p.h, p.y0])
      const sub = rows.filter((r) => r.method === method && r.i === idx)
      const ref: Array<[number, number]> = sub.map((r) => [
        sx(numeric(r, 'x')), sy(numeric(r, 'f_ref')),
      ])
      const est: Array<[number, number]> = sub.map((r) => [
        sx(numeric(r, 'x')), sy(numeric(r, 'f_est_re')),
      ])
      doc.path(ref, 'stroke="#222" stroke-width="1.4"')
      doc.path(est, `stroke="${PALETTE[0]}" stroke-width="1.4" stroke-dasharray="5 3"`)
      for (const t of axisTicksLinear(xDomain[0], xDomain[1], 4)) {
        doc.text(sx(t), p.y0 + p.h + 14, t.toFixed(1), 'text-anchor="middle"')
      }
    })
  })
  doc.text(12, doc.height - 10, 'solid: reference, dashed: estimate')
  return doc.render()
}

/** Model-selection bar chart: forecast RMSE per kernel, argmin-bias kernel
 *  highlighted. */
function renderFig3(req: FigureRequest): string {
  const rows = loadCsv(req.input, [
    'repetition', 'kernel_id', 'mean_s_hat', 'forecast_rmse', 'selected',
  ])
  const rep = String(req.repetition ?? 0)
  const sub = rows.filter((r) => r.repetition === rep)
  if (sub.length === 0) throw new Error(`no rows for repetition ${rep}`)
  const doc = new SvgDoc(Math.max(420, 34 * sub.length + 120), 320)
  const p = panelGrid(1, 1, doc.width, doc.height,
    { top: 30, right: 16, bottom: 110, left: 60, gapX: 0, gapY: 0 })[0][0]
  drawFrame(doc, p, `forecast RMSE by kernel (repetition ${rep})`)
  const rmses = sub.map((r) => numeric(r, 'forecast_rmse'))
  const yDomain: [number, number] = [0, Math.max(...rmses) * 1.1]
  const sy = linearScale(yDomain, [p.y0 + p.h, p.y0])
  const slot = p.w / sub.length
  sub.forEach((r, i) => {
    const rmse = numeric(r, 'forecast_rmse')
    const selected = r.selected === '1'
    const x = p.x0 + i * slot + slot * 0.15
    doc.rect(x, sy(rmse), slot * 0.7, p.y0 + p.h - sy(rmse),
      selected ? 'fill="#d62728"' : 'fill="#1f77b4"')
    const lx = x + slot * 0.35
    doc.add(
      `<text x="${fmt(lx)}" y="${fmt(p.y0 + p.h + 10)}" text-anchor="end" ` +
        `transform="rotate(-55 ${fmt(lx)} ${fmt(p.y0 + p.h + 10)})">${r.kernel_id}</text>`,
    )
    if (selected) {
      doc.text(lx, sy(rmse) - 6, 'min bias', 'text-anchor="middle" fill="#d62728"')
    }
  })
  for (const t of axisTicksLinear(yDomain[0], yDomain[1], 5)) {
    doc.line(p.x0 - 4, sy(t), p.x0, sy(t), 'stroke="#444"')
    doc.text(p.x0 - 6, sy(t) + 3, t.toFixed(2), 'text-anchor="end"')
  }
  return doc.render()
}

const RENDERERS: Record<FigureKind, (req: FigureRequest) => string> = {
  fig1: renderFig1,
  fig2_rates: renderRates,
  fig2_eigfuns: renderEigfuns,
  fig3: renderFig3,
}

/** Render a figure to its output path; nothing is written on failure. */
export function render(req: FigureRequest): string {
  const renderer = RENDERERS[req.figure]
  if (!renderer) throw new Error(`unknown figure ${req.figure}`)
  const svg = renderer(req)
  writeFileSync(req.output, svg, 'utf8')
  return req.output
}
