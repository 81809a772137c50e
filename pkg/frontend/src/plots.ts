/**
 * The four plot kinds. Inputs are parsed rows from the documented schemas;
 * nothing here recomputes physics, and guide geometry comes from the
 * manifest alone.
 */
import { Row } from "./csv";
import { GuideData } from "./manifest";
import { Figure, dataExtent } from "./svg";

/** Eigenvalues in the complex plane plus e^{-theta} [0, inf) rays anchored
 *  at the atomic levels recorded in the manifest. */
export function renderSpectrumPlane(rows: Row[], guide: GuideData): string {
  const re = rows.map((r) => r.E_re);
  const im = rows.map((r) => r.E_im);
  const xExt = dataExtent(re.concat(guide.levels));
  const yExt = dataExtent(im.concat([0]));
  const fig = new Figure(
    {
      title: "spectrum in the complex plane",
      xLabel: "Re E",
      yLabel: "Im E",
    },
    xExt,
    yExt,
  );
  const scale = Math.exp(-guide.thetaRe);
  const dirX = scale * Math.cos(guide.thetaIm);
  const dirY = -scale * Math.sin(guide.thetaIm);
  for (const level of guide.levels) {
    const tMax = rayLimit(level, dirX, dirY, xExt, yExt);
    fig.line(level, 0, level + tMax * dirX, tMax * dirY, "#7799cc", true);
    fig.circle(level, 0, 3, "#7799cc");
  }
  for (const r of rows) {
    fig.circle(r.E_re, r.E_im, 2.4, "#aa2222");
  }
  return fig.render();
}

function rayLimit(
  level: number,
  dirX: number,
  dirY: number,
  xExt: { min: number; max: number },
  yExt: { min: number; max: number },
): number {
  let t = Number.POSITIVE_INFINITY;
  if (dirX > 0) t = Math.min(t, (xExt.max - level) / dirX);
  if (dirX < 0) t = Math.min(t, (xExt.min - level) / dirX);
  if (dirY > 0) t = Math.min(t, yExt.max / dirY);
  if (dirY < 0) t = Math.min(t, yExt.min / dirY);
  return Number.isFinite(t) ? Math.max(t, 0) : 0;
}

/** Tracked resonance trajectory: Im E against the coupling strength. */
export function renderTrajectory(rows: Row[]): string {
  const xs = rows.map((r) => r.kappa_re);
  const ys = rows.map((r) => r.E_im);
  const fig = new Figure(
    {
      title: "resonance trajectory",
      xLabel: "kappa",
      yLabel: "Im E",
    },
    dataExtent(xs),
    dataExtent(ys),
  );
  fig.polyline(rows.map((r) => [r.kappa_re, r.E_im] as [number, number]), "#aa2222");
  for (const r of rows) {
    fig.circle(r.kappa_re, r.E_im, 2.4, "#aa2222");
  }
  return fig.render();
}

/** Deviation across dilation angles versus radial refinement (log10 y). */
export function renderThetaDeviation(rows: Row[]): string {
  const xs = rows.map((r) => r.n_radial);
  const ys = rows.map((r) => Math.log10(Math.max(r.deviation, 1e-300)));
  const fig = new Figure(
    {
      title: "theta-independence deviation trend",
      xLabel: "n_radial",
      yLabel: "log10 max pairwise deviation",
    },
    dataExtent(xs),
    dataExtent(ys),
  );
  const pts = rows.map((r, i) => [xs[i], ys[i]] as [number, number]);
  fig.polyline(pts, "#226699");
  for (const [x, y] of pts) {
    fig.circle(x, y, 3, "#226699");
  }
  return fig.render();
}

/** Horizontal level lines with multiplicity and (l, j) labels. */
export function renderFineStructureLevels(rows: Row[]): string {
  const energies = rows.map((r) => r.energy);
  const fig = new Figure(
    {
      title: "fine-structure levels",
      xLabel: "level group",
      yLabel: "energy",
    },
    { min: -0.5, max: rows.length - 0.5 },
    dataExtent(energies, 0.35),
  );
  rows.forEach((r, i) => {
    fig.line(i - 0.3, r.energy, i + 0.3, r.energy, "#222222");
    fig.label(i - 0.3, r.energy, `l=${r.l} j=${r.j} x${r.multiplicity}`);
  });
  return fig.render();
}
