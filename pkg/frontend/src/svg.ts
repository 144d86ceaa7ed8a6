/**
 * Minimal deterministic SVG scene builder.
 *
 * Every coordinate is formatted with a fixed precision and the element
 * order is fully determined by the call sequence, so identical inputs
 * produce identical bytes.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const fmt = (x: number): string => x.toFixed(2);

export type Scale = (value: number) => number;

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const a = Math.log10(lo);
  const span = Math.log10(hi) - a || 1;
  return (v) => outLo + ((Math.log10(v) - a) / span) * (outHi - outLo);
}

export function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); e <= Math.floor(Math.log10(hi) + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

export function linearTicks(lo: number, hi: number, count = 5): number[] {
  const ticks: number[] = [];
  for (let i = 0; i <= count; i++) {
    ticks.push(lo + ((hi - lo) * i) / count);
  }
  return ticks;
}

export class Scene {
  private parts: string[] = [];

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, dash?: string): void {
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="1.5"${attr} points="${path}"/>`
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    opts: { anchor?: string; size?: number; fill?: string } = {}
  ): void {
    const anchor = opts.anchor ?? "start";
    const size = opts.size ?? 12;
    const fill = opts.fill ?? "#222222";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,sans-serif" ` +
        `font-size="${size}" fill="${fill}" text-anchor="${anchor}">${escapeXml(content)}</text>`
    );
  }

  render(title: string): string {
    const head =
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n` +
      `<text x="${WIDTH / 2}" y="24" font-family="Helvetica,sans-serif" font-size="15" ` +
      `fill="#111111" text-anchor="middle">${escapeXml(title)}</text>`;
    return [head, ...this.parts, "</svg>", ""].join("\n");
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Frame {
  x: Scale;
  y: Scale;
  scene: Scene;
}

export function frame(
  scene: Scene,
  xScale: Scale,
  yScale: Scale,
  xTicks: number[],
  yTicks: number[],
  xLabel: string,
  yLabel: string,
  tickFormat: (v: number) => string
): Frame {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  scene.line(x0, y0, x1, y0, "#333333");
  scene.line(x0, y0, x0, y1, "#333333");
  for (const t of xTicks) {
    const px = xScale(t);
    scene.line(px, y0, px, y0 + 5, "#333333");
    scene.text(px, y0 + 20, tickFormat(t), { anchor: "middle", size: 11 });
  }
  for (const t of yTicks) {
    const py = yScale(t);
    scene.line(x0 - 5, py, x0, py, "#333333");
    scene.text(x0 - 8, py + 4, tickFormat(t), { anchor: "end", size: 11 });
  }
  scene.text((x0 + x1) / 2, HEIGHT - 12, xLabel, { anchor: "middle", size: 13 });
  scene.text(16, (y0 + y1) / 2, yLabel, { anchor: "middle", size: 13 });
  return { x: xScale, y: yScale, scene };
}
