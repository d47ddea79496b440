/** SVG renderers for the metric charts, q-value grid, and budget bar.
 *
 * Pure string builders so they are unit-testable without a DOM. Chart
 * points come straight from server history entries; entries whose metric
 * is null (e.g. EER on truth-less pools) are skipped, never invented.
 */

import type { HistoryPoint } from "./types.js";

export interface ChartPoint {
  x: number;
  y: number;
}

export function chartPoints(
  history: HistoryPoint[],
  metric: "eer" | "reward" | "display_size",
): ChartPoint[] {
  const points: ChartPoint[] = [];
  for (const rec of history) {
    const value = rec[metric];
    if (value === null || value === undefined) continue;
    points.push({ x: rec.iteration, y: value });
  }
  return points;
}

const W = 260;
const H = 120;
const PAD = 24;

function scale(points: ChartPoint[]): (p: ChartPoint) => [number, number] {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(0, ...ys);
  const yMax = Math.max(...ys, yMin + 1e-9);
  const xSpan = Math.max(xMax - xMin, 1e-9);
  return (p) => [
    PAD + ((p.x - xMin) / xSpan) * (W - 2 * PAD),
    H - PAD - ((p.y - yMin) / (yMax - yMin)) * (H - 2 * PAD),
  ];
}

export function lineChartSvg(
  points: ChartPoint[],
  title: string,
  color = "#2563eb",
): string {
  if (points.length === 0) {
    return (
      `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img">` +
      `<text x="${W / 2}" y="${H / 2}" text-anchor="middle" class="chart-empty">` +
      `${title}: no data yet</text></svg>`
    );
  }
  const s = scale(points);
  const coords = points.map((p) => s(p));
  const path = coords
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`)
    .join(" ");
  const dots = coords
    .map(
      ([x, y]) =>
        `<circle class="chart-dot" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2.5" fill="${color}"/>`,
    )
    .join("");
  const last = points[points.length - 1];
  return (
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img">` +
    `<text x="${PAD}" y="12" class="chart-title">${title} (${formatMetric(last.y)})</text>` +
    `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>` +
    dots +
    `</svg>`
  );
}

export function formatMetric(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}

export const COMBO_NAMES = [
  "rep",
  "amb",
  "div",
  "amb+rep",
  "div+amb",
  "div+rep",
  "all",
] as const;
export const MOVE_NAMES = ["shrink", "freeze", "grow"] as const;

/** 7x3 q-value grid; cell shading spans the observed value range. */
export function qGridHtml(qValues: number[] | null): string {
  if (!qValues || qValues.length !== 21) {
    return `<p class="muted">no action values (non-adaptive strategy)</p>`;
  }
  const lo = Math.min(...qValues);
  const hi = Math.max(...qValues);
  const span = Math.max(hi - lo, 1e-12);
  const best = qValues.indexOf(hi);
  let html = `<table class="qgrid"><tr><th></th>`;
  for (const move of MOVE_NAMES) html += `<th>${move}</th>`;
  html += `</tr>`;
  COMBO_NAMES.forEach((combo, c) => {
    html += `<tr><th>${combo}</th>`;
    for (let m = 0; m < 3; m++) {
      const idx = c * 3 + m;
      const v = qValues[idx];
      const alpha = (v - lo) / span;
      const cls = idx === best ? ' class="qbest"' : "";
      html +=
        `<td${cls} style="background: rgba(37, 99, 235, ${(0.15 + 0.6 * alpha).toFixed(3)})"` +
        ` title="action ${idx}">${v.toFixed(3)}</td>`;
    }
    html += `</tr>`;
  });
  return html + `</table>`;
}

export function budgetBarHtml(used: number, max: number): string {
  const pct = max > 0 ? Math.min(100, (100 * used) / max) : 0;
  return (
    `<div class="budget-bar" role="progressbar" aria-valuenow="${used}" aria-valuemax="${max}">` +
    `<div class="budget-fill" style="width: ${pct.toFixed(1)}%"></div>` +
    `<span class="budget-text">${used} / ${max} labels</span></div>`
  );
}
