import { describe, expect, it } from "vitest";
import { cumulativeSvg, histogramSvg } from "../src/charts.js";
import { StatsResponse } from "../src/types.js";

function stats(overrides: Partial<StatsResponse> = {}): StatsResponse {
  return {
    n_labels: 3,
    histogram: [1, 0, 0, 0, 0, 0, 0, 0, 0, 2],
    bin_edges: Array.from({ length: 11 }, (_, k) => k / 10),
    cumulative: [
      [1, 0.9],
      [2, 1.8],
      [3, 1.9],
    ],
    model_version: 1,
    ...overrides,
  };
}

describe("histogramSvg", () => {
  it("draws one bar per bin with the counts attached", () => {
    const svg = histogramSvg(stats());
    expect(svg.match(/<rect /g)).toHaveLength(10);
    expect(svg).toContain('data-count="2"');
    expect(svg).toContain('data-count="1"');
  });

  it("total bar count equals n_labels", () => {
    const s = stats();
    const counts = [...histogramSvg(s).matchAll(/data-count="(\d+)"/g)].map((m) =>
      Number(m[1]),
    );
    expect(counts.reduce((a, b) => a + b, 0)).toBe(s.n_labels);
  });
});

describe("cumulativeSvg", () => {
  it("plots every point and labels the final sum", () => {
    const svg = cumulativeSvg(stats());
    const points = svg.match(/<polyline points="([^"]+)"/);
    expect(points).not.toBeNull();
    // origin plus the three cumulative points
    expect(points![1].trim().split(/\s+/)).toHaveLength(4);
    expect(svg).toContain("sum 1.90");
  });

  it("renders axes only for empty stats", () => {
    const svg = cumulativeSvg(stats({ cumulative: [], n_labels: 0 }));
    expect(svg).not.toContain("<polyline");
    expect(svg.match(/<line /g)).toHaveLength(2);
  });
});
