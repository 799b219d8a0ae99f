#!/usr/bin/env node
import { pathToFileURL } from 'url'
import { render, FigureKind } from './figures.js'

const USAGE = `usage: koopspec-figures --figure <fig1|fig2_rates|fig2_eigfuns|fig3>
                        --in <data.csv> --out <figure.svg>
                        [--reference spectrum.csv] [--slopes slopes.csv]
                        [--repetition N]

Renders the koopspec experiment CSVs into deterministic SVG figures.`

function parseArgs(argv: string[]) {
  const opts: Record<string, string> = {}
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i]
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`bad argument ${key}`)
    }
    opts[key.slice(2)] = argv[i + 1]
  }
  return opts
}

export function main(argv: string[]): number {
  if (argv.includes('--help') || argv.length === 0) {
    console.log(USAGE)
    return 0
  }
  let opts: Record<string, string>
  try {
    opts = parseArgs(argv)
  } catch (err) {
    console.error(String(err))
    console.error(USAGE)
    return 2
  }
  const figure = opts.figure as FigureKind
  if (!figure || !opts.in || !opts.out) {
    console.error('--figure, --in and --out are required')
    return 2
  }
  try {
    const path = render({
      figure,
      input: opts.in,
      output: opts.out,
      reference: opts.reference,
      slopes: opts.slopes,
      repetition: opts.repetition ? Number(opts.repetition) : undefined,
    })
    console.log(`wrote ${path}`)
    return 0
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`)
    return 1
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)))
}
