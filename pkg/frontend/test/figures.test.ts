import { createHash } from 'crypto'
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { beforeAll, describe, expect, it } from 'vitest'
import { render, FigureKind } from '../src/figures.js'

const FIXTURES = join(__dirname, 'fixtures')
let outDir: string

beforeAll(() => {
  outDir = mkdtempSync(join(tmpdir(), 'figures-'))
})

const sha = (path: string) => createHash('sha256').update(readFileSync(path)).digest('hex')

const REQUESTS: Array<[FigureKind, Record<string, string>]> = [
  ['fig1', { input: join(FIXTURES, 'eigenvalues.csv'), reference: join(FIXTURES, 'spectrum.csv') }],
  ['fig2_rates', { input: join(FIXTURES, 'errors.csv'), slopes: join(FIXTURES, 'slopes.csv') }],
  ['fig2_eigfuns', { input: join(FIXTURES, 'eigenfunctions.csv') }],
  ['fig3', { input: join(FIXTURES, 'selection.csv') }],
]

describe('all four figure types', () => {
  it.each(REQUESTS)('%s renders without error', (figure, extra) => {
    const output = join(outDir, `${figure}.svg`)
    render({ figure, output, ...extra } as any)
    const body = readFileSync(output, 'utf8')
    expect(body.startsWith('<?xml')).toBe(true)
    expect(body).toContain('</svg>')
  })

  it.each(REQUESTS)('%s is deterministic across two renders', (figure, extra) => {
    const a = join(outDir, `${figure}-a.svg`)
    const b = join(outDir, `${figure}-b.svg`)
    render({ figure, output: a, ...extra } as any)
    render({ figure, output: b, ...extra } as any)
    expect(sha(a)).toBe(sha(b))
  })
})

describe('figure content', () => {
  it('fig1 draws one panel per method/kernel pair and reference lines', () => {
    const output = join(outDir, 'fig1-content.svg')
    render({
      figure: 'fig1',
      input: join(FIXTURES, 'eigenvalues.csv'),
      reference: join(FIXTURES, 'spectrum.csv'),
      output,
    })
    const body = readFileSync(output, 'utf8')
    expect(body).toContain('pcr / good')
    expect(body).toContain('rrr / bad(3)')
    expect(body.match(/stroke-dasharray="4 3"/g)!.length).toBe(4 * 3) // 4 panels x 3 mus
  })

  it('fig2_rates annotates the slope from the CSV', () => {
    const output = join(outDir, 'rates-content.svg')
    render({
      figure: 'fig2_rates',
      input: join(FIXTURES, 'errors.csv'),
      slopes: join(FIXTURES, 'slopes.csv'),
      output,
    })
    expect(readFileSync(output, 'utf8')).toMatch(/slope -?\d\.\d{3}/)
  })

  it('fig3 highlights the selected kernel', () => {
    const output = join(outDir, 'fig3-content.svg')
    render({ figure: 'fig3', input: join(FIXTURES, 'selection.csv'), output })
    expect(readFileSync(output, 'utf8')).toContain('min bias')
  })
})

describe('error handling', () => {
  it('missing column is named and nothing is written', () => {
    const broken = join(outDir, 'broken.csv')
    writeFileSync(broken, 'a,b\n1,2\n')
    const output = join(outDir, 'should-not-exist.svg')
    expect(() => render({ figure: 'fig3', input: broken, output })).toThrow(
      /missing column repetition/,
    )
    expect(existsSync(output)).toBe(false)
  })

  it('empty CSV is rejected and nothing is written', () => {
    const empty = join(outDir, 'empty.csv')
    writeFileSync(empty, 'trial,method,kernel_id,lambda_re,lambda_im\n')
    const output = join(outDir, 'empty.svg')
    expect(() =>
      render({ figure: 'fig1', input: empty, output }),
    ).toThrow(/no data rows/)
    expect(existsSync(output)).toBe(false)
  })

  it('unknown figure kind is rejected', () => {
    expect(() =>
      render({ figure: 'nope' as FigureKind, input: 'x.csv', output: 'y.svg' }),
    ).toThrow(/unknown figure/)
  })

  it('unknown repetition in fig3 is rejected', () => {
    const output = join(outDir, 'norep.svg')
    expect(() =>
      render({
        figure: 'fig3',
        input: join(FIXTURES, 'selection.csv'),
        output,
        repetition: 42,
      }),
    ).toThrow(/repetition 42/)
  })
})
