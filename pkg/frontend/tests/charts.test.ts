import { describe, expect, it } from "vitest";

import {
  budgetBarHtml,
  chartPoints,
  lineChartSvg,
  qGridHtml,
} from "../src/charts.js";
import type { HistoryPoint } from "../src/types.js";

const history: HistoryPoint[] = [
  { iteration: 1, samp_pct: 10, eer: 0.5, reward: null, display_size: 4 },
  { iteration: 2, samp_pct: 20, eer: 0.25, reward: 0.75, display_size: 6 },
  { iteration: 3, samp_pct: 30, eer: null, reward: 0.5, display_size: 4 },
];

describe("chartPoints", () => {
  it("emits one point per history entry with a value", () => {
    expect(chartPoints(history, "eer")).toEqual([
      { x: 1, y: 0.5 },
      { x: 2, y: 0.25 },
    ]);
    expect(chartPoints(history, "display_size")).toHaveLength(3);
  });

  it("skips null metrics instead of inventing values", () => {
    const rewards = chartPoints(history, "reward");
    expect(rewards.map((p) => p.x)).toEqual([2, 3]);
  });
});

describe("lineChartSvg", () => {
  it("draws one dot per point", () => {
    const svg = lineChartSvg(chartPoints(history, "display_size"), "size");
    expect(svg.match(/chart-dot/g)).toHaveLength(3);
    expect(svg).toContain("<path");
  });

  it("renders an empty-state message without data", () => {
    const svg = lineChartSvg([], "test EER");
    expect(svg).toContain("no data yet");
    expect(svg).not.toContain("<path");
  });
});

describe("qGridHtml", () => {
  it("renders the 7x3 grid with the best cell highlighted", () => {
    const q = new Array(21).fill(0.1);
    q[13] = 0.9;
    const html = qGridHtml(q);
    expect(html.match(/<td/g)).toHaveLength(21);
    expect(html.match(/qbest/g)).toHaveLength(1);
    for (const name of ["rep", "amb", "div", "amb+rep", "div+amb", "div+rep", "all"]) {
      expect(html).toContain(`<th>${name}</th>`);
    }
    for (const move of ["shrink", "freeze", "grow"]) {
      expect(html).toContain(`<th>${move}</th>`);
    }
  });

  it("degrades gracefully without q values", () => {
    expect(qGridHtml(null)).toContain("no action values");
  });
});

describe("budgetBarHtml", () => {
  it("reports used/max and a clamped fill width", () => {
    const html = budgetBarHtml(6, 8);
    expect(html).toContain("6 / 8 labels");
    expect(html).toContain("width: 75.0%");
    expect(budgetBarHtml(9, 8)).toContain("width: 100.0%");
  });
});
