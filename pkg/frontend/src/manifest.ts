/**
 * Manifest fields the plots consume. Guide-ray geometry comes from here,
 * never from fitting the data.
 */
import { SchemaError } from "./csv";

export interface GuideData {
  thetaRe: number;
  thetaIm: number;
  levels: number[];
}

export function readGuideData(manifestJson: string): GuideData {
  let doc: any;
  try {
    doc = JSON.parse(manifestJson);
  } catch {
    throw new SchemaError("manifest is not valid JSON");
  }
  const ham = doc.hamiltonian;
  if (!ham || typeof ham.theta_re !== "number" || typeof ham.theta_im !== "number") {
    throw new SchemaError("missing column: hamiltonian.theta_re/theta_im");
  }
  const levels = doc.model_levels;
  if (!Array.isArray(levels) || levels.some((x: unknown) => typeof x !== "number")) {
    throw new SchemaError("missing column: model_levels");
  }
  return { thetaRe: ham.theta_re, thetaIm: ham.theta_im, levels };
}
