/** Feature-scatter fallback for pools without patch images.
 *
 * Items are projected onto the first two principal directions of the
 * displayed feature vectors (power iteration with deflation), so
 * synthetic pools get a meaningful 2-D card rendering.
 */

export function meanCenter(rows: number[][]): number[][] {
  const n = rows.length;
  const d = rows[0].length;
  const mean = new Array(d).fill(0);
  for (const row of rows) for (let j = 0; j < d; j++) mean[j] += row[j] / n;
  return rows.map((row) => row.map((v, j) => v - mean[j]));
}

function matVec(cov: number[][], v: number[]): number[] {
  return cov.map((row) => row.reduce((acc, c, j) => acc + c * v[j], 0));
}

function norm(v: number[]): number {
  return Math.sqrt(v.reduce((acc, x) => acc + x * x, 0));
}

export function principalDirections(rows: number[][]): [number[], number[]] {
  const centered = meanCenter(rows);
  const d = rows[0].length;
  if (d === 1) return [[1], [0].concat(new Array(d - 1).fill(0))];
  const cov: number[][] = Array.from({ length: d }, () => new Array(d).fill(0));
  for (const row of centered) {
    for (let i = 0; i < d; i++) {
      for (let j = 0; j < d; j++) cov[i][j] += (row[i] * row[j]) / rows.length;
    }
  }
  const directions: number[][] = [];
  for (let comp = 0; comp < 2; comp++) {
    // deterministic start; deflate previously found directions
    let v = Array.from({ length: d }, (_, j) => ((j + comp) % 3) + 1);
    for (let iter = 0; iter < 100; iter++) {
      for (const prev of directions) {
        const dot = v.reduce((acc, x, j) => acc + x * prev[j], 0);
        v = v.map((x, j) => x - dot * prev[j]);
      }
      const next = matVec(cov, v);
      const len = norm(next);
      if (len < 1e-12) break;
      v = next.map((x) => x / len);
    }
    const len = norm(v);
    directions.push(len > 0 ? v.map((x) => x / len) : v);
  }
  return [directions[0], directions[1]];
}

export interface ScatterPoint {
  id: number;
  x: number;
  y: number;
}

export function project(items: Array<{ id: number; features: number[] }>): ScatterPoint[] {
  if (items.length === 0) return [];
  const rows = items.map((it) => it.features);
  if (items.length === 1 || rows[0].length === 1) {
    return items.map((it, i) => ({ id: it.id, x: it.features[0] ?? i, y: 0 }));
  }
  const [p1, p2] = principalDirections(rows);
  const centered = meanCenter(rows);
  return items.map((it, i) => ({
    id: it.id,
    x: centered[i].reduce((acc, v, j) => acc + v * p1[j], 0),
    y: centered[i].reduce((acc, v, j) => acc + v * p2[j], 0),
  }));
}

/** Small scatter card highlighting one item among its display peers. */
export function scatterSvg(points: ScatterPoint[], highlightId: number): string {
  const size = 96;
  const pad = 10;
  if (points.length === 0) return `<svg viewBox="0 0 ${size} ${size}"></svg>`;
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xSpan = Math.max(Math.max(...xs) - xMin, 1e-9);
  const yMin = Math.min(...ys);
  const ySpan = Math.max(Math.max(...ys) - yMin, 1e-9);
  const sx = (x: number) => pad + ((x - xMin) / xSpan) * (size - 2 * pad);
  const sy = (y: number) => size - pad - ((y - yMin) / ySpan) * (size - 2 * pad);
  const dots = points
    .map((p) => {
      const main = p.id === highlightId;
      return (
        `<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}"` +
        ` r="${main ? 5 : 2.5}" fill="${main ? "#dc2626" : "#94a3b8"}"/>`
      );
    })
    .join("");
  return `<svg viewBox="0 0 ${size} ${size}" class="scatter">${dots}</svg>`;
}
