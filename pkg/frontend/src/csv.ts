import { readFileSync } from 'fs'
import Papa from 'papaparse'

export type Row = Record<string, string>

/** Load a CSV produced by the koopspec CLI and check its schema. */
export function loadCsv(path: string, required: string[]): Row[] {
  const text = readFileSync(path, 'utf8')
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true })
  if (parsed.errors.length > 0) {
    throw new Error(`${path}: ${parsed.errors[0].message}`)
  }
  const rows = parsed.data
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows`)
  }
  const columns = Object.keys(rows[0])
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new Error(`${path}: missing column ${col}`)
    }
  }
  return rows
}

export function numeric(row: Row, col: string): number {
  const v = Number(row[col])
  if (!Number.isFinite(v)) {
    throw new Error(`non-numeric value '${row[col]}' in column ${col}`)
  }
  return v
}
