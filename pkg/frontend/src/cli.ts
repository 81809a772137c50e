#!/usr/bin/env node
/**
 * plotkit <kind> --in <csv> [--manifest <json>] --out <svg>
 *
 * Kinds: spectrum-plane | trajectory | theta-deviation | fine-structure-levels.
 * Reads only documented dilres output files and writes a deterministic SVG.
 */
import * as fs from "node:fs";

import {
  LEVELS_COLUMNS,
  SPECTRUM_COLUMNS,
  SchemaError,
  THETA_DEVIATION_COLUMNS,
  TRAJECTORY_COLUMNS,
  parseCsv,
} from "./csv";
import { readGuideData } from "./manifest";
import {
  renderFineStructureLevels,
  renderSpectrumPlane,
  renderThetaDeviation,
  renderTrajectory,
} from "./plots";

export const KINDS = [
  "spectrum-plane",
  "trajectory",
  "theta-deviation",
  "fine-structure-levels",
] as const;

export interface Args {
  kind: string;
  inPath: string;
  manifestPath?: string;
  outPath: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error(`usage: plotkit <kind> --in <csv> [--manifest <json>] --out <svg>`);
  }
  const kind = argv[0];
  if (!(KINDS as readonly string[]).includes(kind)) {
    throw new Error(`unknown plot kind: ${kind} (expected ${KINDS.join(" | ")})`);
  }
  const opts: Record<string, string> = {};
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed option near ${key}`);
    }
    opts[key.slice(2)] = value;
  }
  if (!opts.in || !opts.out) {
    throw new Error("both --in and --out are required");
  }
  return { kind, inPath: opts.in, manifestPath: opts.manifest, outPath: opts.out };
}

export function renderFromFiles(args: Args): string {
  const text = fs.readFileSync(args.inPath, "utf8");
  switch (args.kind) {
    case "spectrum-plane": {
      if (!args.manifestPath) {
        throw new Error("spectrum-plane needs --manifest for the guide rays");
      }
      const guide = readGuideData(fs.readFileSync(args.manifestPath, "utf8"));
      return renderSpectrumPlane(parseCsv(text, SPECTRUM_COLUMNS), guide);
    }
    case "trajectory":
      return renderTrajectory(parseCsv(text, TRAJECTORY_COLUMNS));
    case "theta-deviation":
      return renderThetaDeviation(parseCsv(text, THETA_DEVIATION_COLUMNS));
    case "fine-structure-levels":
      return renderFineStructureLevels(parseCsv(text, LEVELS_COLUMNS));
    default:
      throw new Error(`unknown plot kind: ${args.kind}`);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 2;
  }
  if (args.outPath.toLowerCase().endsWith(".png")) {
    process.stderr.write("png output is not supported; use an .svg path\n");
    return 2;
  }
  try {
    const svg = renderFromFiles(args);
    fs.writeFileSync(args.outPath, svg);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema violation: ${err.message}\n`);
      return 1;
    }
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
