/** Scatter trade-off view: pure geometry over server-computed index scores.
 *
 * Points live at (x index, y index) taken verbatim from the bundle; axes are
 * logarithmic so the multiplicative bin boundaries form a symmetric grid.
 * Nothing here computes a rating.
 */

import type { Bundle, ScatterPoint, ScatterSeries } from "./types.js";

export interface ScatterLayout {
  width: number;
  height: number;
  margin: number;
}

export const DEFAULT_LAYOUT: ScatterLayout = { width: 560, height: 420, margin: 44 };

/** Rebuild a scatter series from bundle fields for any pair of metric keys. */
export function scatterFromBundle(bundle: Bundle, xKey: string, yKey: string): ScatterSeries {
  const points: ScatterPoint[] = [];
  for (const entry of bundle.experiments) {
    if (!(xKey in entry.index_scores) || !(yKey in entry.index_scores)) {
      continue;
    }
    points.push({
      id: entry.id,
      dataset: entry.dataset,
      method: entry.method,
      environment: entry.environment,
      x: entry.index_scores[xKey],
      y: entry.index_scores[yKey],
      x_value: entry.values[xKey],
      y_value: entry.values[yKey],
      compound: entry.compound,
      reference: entry.reference,
    });
  }
  return { x_metric: xKey, y_metric: yKey, boundaries: [...bundle.scheme.bins], points };
}

export interface ScatterGeometry {
  layout: ScatterLayout;
  gridX: { value: number; px: number }[];
  gridY: { value: number; px: number }[];
  points: { px: number; py: number; point: ScatterPoint }[];
  /** Pixel position of index (1, 1), where every reference sits. */
  refX: number;
  refY: number;
}

function logDomain(values: number[]): [number, number] {
  const pad = 1.3;
  let low = Math.min(...values) / pad;
  let high = Math.max(...values) * pad;
  if (!(low > 0)) {
    low = 0.1;
  }
  if (!(high > low)) {
    high = low * 10;
  }
  return [low, high];
}

export function computeScatterGeometry(
  series: ScatterSeries,
  layout: ScatterLayout = DEFAULT_LAYOUT,
): ScatterGeometry {
  const xs = series.points.map((p) => p.x).concat(series.boundaries, [1]);
  const ys = series.points.map((p) => p.y).concat(series.boundaries, [1]);
  const [x0, x1] = logDomain(xs);
  const [y0, y1] = logDomain(ys);
  const { width, height, margin } = layout;

  const sx = (v: number) =>
    margin + ((Math.log(v) - Math.log(x0)) / (Math.log(x1) - Math.log(x0))) * (width - 2 * margin);
  const sy = (v: number) =>
    height - margin - ((Math.log(v) - Math.log(y0)) / (Math.log(y1) - Math.log(y0))) * (height - 2 * margin);

  return {
    layout,
    gridX: series.boundaries.map((value) => ({ value, px: sx(value) })),
    gridY: series.boundaries.map((value) => ({ value, px: sy(value) })),
    points: series.points.map((point) => ({ px: sx(point.x), py: sy(point.y), point })),
    refX: sx(1),
    refY: sy(1),
  };
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render the scatter as an SVG string; an empty series still draws the grid. */
export function renderScatterSvg(
  series: ScatterSeries,
  layout: ScatterLayout = DEFAULT_LAYOUT,
): string {
  const geo = computeScatterGeometry(series, layout);
  const { width, height, margin } = layout;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" class="scatter" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(
    `<rect x="${margin}" y="${margin}" width="${width - 2 * margin}" height="${height - 2 * margin}" class="plot-area"/>`,
  );
  for (const grid of geo.gridX) {
    parts.push(
      `<line class="grid-line" data-axis="x" data-boundary="${grid.value}" ` +
        `x1="${grid.px.toFixed(2)}" y1="${margin}" x2="${grid.px.toFixed(2)}" y2="${height - margin}"/>`,
    );
  }
  for (const grid of geo.gridY) {
    parts.push(
      `<line class="grid-line" data-axis="y" data-boundary="${grid.value}" ` +
        `x1="${margin}" y1="${grid.px.toFixed(2)}" x2="${width - margin}" y2="${grid.px.toFixed(2)}"/>`,
    );
  }
  for (const { px, py, point } of geo.points) {
    const title =
      `${point.method} on ${point.dataset} (${point.environment})\n` +
      `${series.x_metric}: ${point.x_value} (index ${point.x.toFixed(3)})\n` +
      `${series.y_metric}: ${point.y_value} (index ${point.y.toFixed(3)})`;
    const classes = point.reference ? "point reference" : "point";
    parts.push(`<g class="${classes} rating-${esc(point.compound)}" data-id="${esc(point.id)}">`);
    if (point.reference) {
      parts.push(
        `<circle class="reference-ring" cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="10"/>`,
      );
    }
    parts.push(
      `<circle class="dot" cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="5">` +
        `<title>${esc(title)}</title></circle>`,
    );
    parts.push("</g>");
  }
  parts.push(
    `<text class="axis-label" x="${width / 2}" y="${height - 8}" text-anchor="middle">` +
      `${esc(series.x_metric)} index →</text>`,
  );
  parts.push(
    `<text class="axis-label" x="12" y="${height / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 12 ${height / 2})">${esc(series.y_metric)} index →</text>`,
  );
  parts.push("</svg>");
  return parts.join("");
}
