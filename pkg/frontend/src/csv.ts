/** Strict CSV handling for the simulator's output contracts. */

export const SUMMARY_COLUMNS = [
  "rat",
  "involvement",
  "n_assisting",
  "mean_sinr_db",
  "sinr_ci95_db",
  "energy_efficiency_bit_per_j",
  "ee_gain_vs_baseline",
  "delivery_ratio",
  "rounds",
] as const;

export const SNAPSHOT_COLUMNS = ["node_id", "kind", "x_m", "y_m", "z_m"] as const;

export interface SummaryRow {
  rat: string;
  involvement: string;
  n_assisting: number;
  mean_sinr_db: number;
  sinr_ci95_db: number;
  energy_efficiency_bit_per_j: number;
  ee_gain_vs_baseline: number | null;
  delivery_ratio: number;
  rounds: number;
}

export interface SnapshotRow {
  node_id: number;
  kind: string;
  x_m: number;
  y_m: number;
  z_m: number;
}

export class SchemaError extends Error {
  constructor(
    readonly missing: string[],
    readonly extra: string[],
  ) {
    super(
      `column mismatch: missing=[${missing.join(", ")}] unexpected=[${extra.join(", ")}]`,
    );
  }
}

/** Split simple comma-separated lines (the simulator never quotes cells). */
function parseTable(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function checkHeader(header: string[] | undefined, expected: readonly string[]): void {
  const got = header ?? [];
  const missing = expected.filter((c) => !got.includes(c));
  const extra = got.filter((c) => !expected.includes(c));
  if (missing.length || extra.length || got.join(",") !== expected.join(",")) {
    throw new SchemaError(missing, extra);
  }
}

export function parseSummary(text: string): SummaryRow[] {
  const rows = parseTable(text);
  checkHeader(rows[0], SUMMARY_COLUMNS);
  return rows.slice(1).map((cells) => ({
    rat: cells[0] ?? "",
    involvement: cells[1] ?? "",
    n_assisting: Number(cells[2]),
    mean_sinr_db: Number(cells[3]),
    sinr_ci95_db: Number(cells[4]),
    energy_efficiency_bit_per_j: Number(cells[5]),
    ee_gain_vs_baseline: cells[6] === "" || cells[6] === undefined ? null : Number(cells[6]),
    delivery_ratio: Number(cells[7]),
    rounds: Number(cells[8]),
  }));
}

export function parseSnapshot(text: string): SnapshotRow[] {
  const rows = parseTable(text);
  checkHeader(rows[0], SNAPSHOT_COLUMNS);
  return rows.slice(1).map((cells) => ({
    node_id: Number(cells[0]),
    kind: cells[1] ?? "",
    x_m: Number(cells[2]),
    y_m: Number(cells[3]),
    z_m: Number(cells[4]),
  }));
}
