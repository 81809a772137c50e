/**
 * Strict CSV reading for the documented dilres output schemas.
 * Every parser validates the header and names the offending column on
 * mismatch; values are plain finite numbers.
 */

export class SchemaError extends Error {}

export type Row = Record<string, number>;

export function parseCsv(text: string, requiredColumns: string[]): Row[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: missing header row");
  }
  const header = lines[0].split(",");
  for (const col of requiredColumns) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing column: ${col}`);
    }
  }
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(`row ${i} has ${parts.length} fields, expected ${header.length}`);
    }
    const row: Row = {};
    for (let j = 0; j < header.length; j++) {
      const value = Number(parts[j]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`non-numeric value in column: ${header[j]}`);
      }
      row[header[j]] = value;
    }
    rows.push(row);
  }
  return rows;
}

export const SPECTRUM_COLUMNS = ["index", "E_re", "E_im", "residual", "cluster", "multiplicity"];
export const TRAJECTORY_COLUMNS = ["kappa_re", "kappa_im", "theta_re", "theta_im", "E_re", "E_im", "cluster_spread", "residual"];
export const THETA_DEVIATION_COLUMNS = ["n_radial", "deviation", "E_re_mean", "E_im_mean"];
export const LEVELS_COLUMNS = ["energy", "multiplicity", "l", "j"];
