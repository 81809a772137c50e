import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as path from "node:path";
import { test } from "node:test";

import {
  LEVELS_COLUMNS,
  SPECTRUM_COLUMNS,
  THETA_DEVIATION_COLUMNS,
  TRAJECTORY_COLUMNS,
  parseCsv,
} from "../src/csv";
import { readGuideData } from "../src/manifest";
import {
  renderFineStructureLevels,
  renderSpectrumPlane,
  renderThetaDeviation,
  renderTrajectory,
} from "../src/plots";

const FIXTURES = path.join(__dirname, "..", "..", "fixtures");
const read = (name: string) => fs.readFileSync(path.join(FIXTURES, name), "utf8");

function assertValidSvg(svg: string): void {
  assert.ok(svg.startsWith("<svg "));
  assert.ok(svg.trimEnd().endsWith("</svg>"));
  assert.ok(svg.includes("<rect"));
}

test("spectrum-plane renders points and guide rays", () => {
  const rows = parseCsv(read("spectrum.csv"), SPECTRUM_COLUMNS);
  const guide = readGuideData(read("manifest.json"));
  const svg = renderSpectrumPlane(rows, guide);
  assertValidSvg(svg);
  const dashed = (svg.match(/stroke-dasharray/g) || []).length;
  assert.equal(dashed, guide.levels.length);
  const circles = (svg.match(/<circle/g) || []).length;
  assert.equal(circles, rows.length + guide.levels.length);
});

test("decoupled spectrum points sit on the guide rays", () => {
  // fixture was produced at g = 0: eigenvalues are level + t e^{-theta}, t >= 0
  const rows = parseCsv(read("spectrum.csv"), SPECTRUM_COLUMNS);
  const guide = readGuideData(read("manifest.json"));
  const dirX = Math.exp(-guide.thetaRe) * Math.cos(guide.thetaIm);
  const dirY = -Math.exp(-guide.thetaRe) * Math.sin(guide.thetaIm);
  for (const r of rows) {
    const dist = Math.min(
      ...guide.levels.map((level) => {
        const t = Math.max(0, (r.E_re - level) * dirX + r.E_im * dirY);
        const scale = dirX * dirX + dirY * dirY;
        const px = level + (t / scale) * dirX;
        const py = (t / scale) * dirY;
        return Math.hypot(r.E_re - px, r.E_im - py);
      }),
    );
    assert.ok(dist < 1e-9, `point off the rays by ${dist}`);
  }
});

test("trajectory renders markers per path point", () => {
  const rows = parseCsv(read("trajectory.csv"), TRAJECTORY_COLUMNS);
  const svg = renderTrajectory(rows);
  assertValidSvg(svg);
  const circles = (svg.match(/<circle/g) || []).length;
  assert.equal(circles, rows.length);
  assert.ok(svg.includes("<polyline"));
});

test("empty trajectory renders empty axes", () => {
  const svg = renderTrajectory(parseCsv("kappa_re,kappa_im,theta_re,theta_im,E_re,E_im,cluster_spread,residual\n", TRAJECTORY_COLUMNS));
  assertValidSvg(svg);
  assert.equal((svg.match(/<circle/g) || []).length, 0);
});

test("theta-deviation trend decreases in the fixture", () => {
  const rows = parseCsv(read("theta_deviation.csv"), THETA_DEVIATION_COLUMNS);
  const svg = renderThetaDeviation(rows);
  assertValidSvg(svg);
  for (let i = 1; i < rows.length; i++) {
    assert.ok(rows[i].deviation < rows[i - 1].deviation);
  }
});

test("fine-structure levels show the (2, 2, 4) multiplicities", () => {
  const rows = parseCsv(read("levels.csv"), LEVELS_COLUMNS);
  const svg = renderFineStructureLevels(rows);
  assertValidSvg(svg);
  const mults = rows.map((r) => r.multiplicity).sort((a, b) => a - b);
  assert.deepEqual(mults, [2, 2, 4]);
  assert.equal((svg.match(/ x2<\/text>/g) || []).length, 2);
  assert.equal((svg.match(/ x4<\/text>/g) || []).length, 1);
});

test("rendering is deterministic per input", () => {
  const rows = parseCsv(read("spectrum.csv"), SPECTRUM_COLUMNS);
  const guide = readGuideData(read("manifest.json"));
  assert.equal(renderSpectrumPlane(rows, guide), renderSpectrumPlane(rows, guide));
  const traj = parseCsv(read("trajectory.csv"), TRAJECTORY_COLUMNS);
  assert.equal(renderTrajectory(traj), renderTrajectory(traj));
});
