/**
 * Minimal deterministic SVG scene builder: linear scales, nice ticks, an
 * axes frame, and a few mark primitives. Pure string assembly, no floating
 * point formatting left to locale or environment.
 */

export interface Extent {
  min: number;
  max: number;
}

export function fmt(x: number): string {
  if (Object.is(x, -0)) x = 0;
  const s = x.toPrecision(10);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+($|e)/, "$1")
    : s;
}

export function dataExtent(values: number[], padFraction = 0.08): Extent {
  if (values.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    const pad = Math.max(Math.abs(min) * 0.5, 0.5);
    return { min: min - pad, max: max + pad };
  }
  const pad = (max - min) * padFraction;
  return { min: min - pad, max: max + pad };
}

export function ticks(e: Extent, count = 6): number[] {
  const span = e.max - e.min;
  const rawStep = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= rawStep) {
      step = m * mag;
      break;
    }
  }
  const first = Math.ceil(e.min / step) * step;
  const out: number[] = [];
  for (let t = first; t <= e.max + step * 1e-9; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return out;
}

export class LinearScale {
  constructor(public domain: Extent, public range: [number, number]) {}

  map(x: number): number {
    const { min, max } = this.domain;
    const [a, b] = this.range;
    return a + ((x - min) / (max - min)) * (b - a);
  }
}

export interface FigureOptions {
  width?: number;
  height?: number;
  margin?: number;
  title: string;
  xLabel: string;
  yLabel: string;
}

export class Figure {
  readonly width: number;
  readonly height: number;
  readonly margin: number;
  readonly xs: LinearScale;
  readonly ys: LinearScale;
  private readonly parts: string[] = [];

  constructor(opts: FigureOptions, xExtent: Extent, yExtent: Extent) {
    this.width = opts.width ?? 640;
    this.height = opts.height ?? 440;
    this.margin = opts.margin ?? 64;
    this.xs = new LinearScale(xExtent, [this.margin, this.width - this.margin / 2]);
    this.ys = new LinearScale(yExtent, [this.height - this.margin, this.margin / 2]);
    this.frame(opts);
  }

  private frame(opts: FigureOptions): void {
    const { width, height, margin } = this;
    this.parts.push(
      `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>`,
    );
    const x0 = margin;
    const x1 = width - margin / 2;
    const y0 = height - margin;
    const y1 = margin / 2;
    this.parts.push(
      `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="black" stroke-width="1"/>`,
    );
    for (const t of ticks(this.xs.domain)) {
      const px = this.xs.map(t);
      this.parts.push(
        `<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`,
        `<text x="${fmt(px)}" y="${y0 + 18}" font-size="11" text-anchor="middle" font-family="monospace">${fmt(t)}</text>`,
      );
    }
    for (const t of ticks(this.ys.domain)) {
      const py = this.ys.map(t);
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`,
        `<text x="${x0 - 8}" y="${fmt(py + 4)}" font-size="11" text-anchor="end" font-family="monospace">${fmt(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${fmt(width / 2)}" y="20" font-size="14" text-anchor="middle" font-family="monospace">${escapeXml(opts.title)}</text>`,
      `<text x="${fmt((x0 + x1) / 2)}" y="${height - 12}" font-size="12" text-anchor="middle" font-family="monospace">${escapeXml(opts.xLabel)}</text>`,
      `<text x="16" y="${fmt((y0 + y1) / 2)}" font-size="12" text-anchor="middle" font-family="monospace" transform="rotate(-90 16 ${fmt((y0 + y1) / 2)})">${escapeXml(opts.yLabel)}</text>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${fmt(this.xs.map(x))}" cy="${fmt(this.ys.map(y))}" r="${r}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, dashed = false): void {
    const dash = dashed ? ` stroke-dasharray="5,4"` : "";
    this.parts.push(
      `<line x1="${fmt(this.xs.map(x1))}" y1="${fmt(this.ys.map(y1))}" x2="${fmt(this.xs.map(x2))}" y2="${fmt(this.ys.map(y2))}" stroke="${stroke}" stroke-width="1.2"${dash}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string): void {
    if (points.length === 0) return;
    const pts = points
      .map(([x, y]) => `${fmt(this.xs.map(x))},${fmt(this.ys.map(y))}`)
      .join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.4"/>`);
  }

  label(x: number, y: number, text: string, anchor = "start"): void {
    this.parts.push(
      `<text x="${fmt(this.xs.map(x))}" y="${fmt(this.ys.map(y) - 6)}" font-size="11" text-anchor="${anchor}" font-family="monospace">${escapeXml(text)}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      ...this.parts,
      `</svg>`,
      ``,
    ].join("\n");
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
