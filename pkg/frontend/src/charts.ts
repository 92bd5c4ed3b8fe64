import { StatsResponse } from "./types.js";

const W = 420;
const H = 180;
const PAD = 28;

function esc(n: number): string {
  return Number.isInteger(n) ? String(n) : n.toFixed(2);
}

/** SVG bar chart of the 10-bin label histogram. */
export function histogramSvg(stats: StatsResponse): string {
  const hist = stats.histogram;
  const maxCount = Math.max(1, ...hist);
  const barW = (W - 2 * PAD) / hist.length;
  const parts: string[] = [
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img" aria-label="label histogram">`,
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"/>`,
  ];
  hist.forEach((count, i) => {
    const h = ((H - 2 * PAD) * count) / maxCount;
    const x = PAD + i * barW;
    const y = H - PAD - h;
    parts.push(
      `<rect x="${esc(x + 1)}" y="${esc(y)}" width="${esc(barW - 2)}" height="${esc(h)}" class="bar" data-count="${count}"/>`,
    );
    parts.push(
      `<text x="${esc(x + barW / 2)}" y="${H - PAD + 14}" class="tick">${stats.bin_edges[i].toFixed(1)}</text>`,
    );
  });
  parts.push(`<text x="${W - PAD}" y="${H - PAD + 14}" class="tick">1.0</text>`);
  parts.push("</svg>");
  return parts.join("");
}

/** SVG line chart of the cumulative label sum over labeling order. */
export function cumulativeSvg(stats: StatsResponse): string {
  const pts = stats.cumulative;
  const parts: string[] = [
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img" aria-label="cumulative label sum">`,
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"/>`,
    `<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" class="axis"/>`,
  ];
  if (pts.length > 0) {
    const maxX = Math.max(1, pts[pts.length - 1][0]);
    const maxY = Math.max(1, pts[pts.length - 1][1]);
    const coords = pts.map(([x, y]) => {
      const px = PAD + ((W - 2 * PAD) * x) / maxX;
      const py = H - PAD - ((H - 2 * PAD) * y) / maxY;
      return `${esc(px)},${esc(py)}`;
    });
    parts.push(
      `<polyline points="${esc(PAD)},${esc(H - PAD)} ${coords.join(" ")}" class="curve"/>`,
    );
    parts.push(
      `<text x="${W - PAD}" y="${PAD}" class="tick" text-anchor="end">sum ${esc(pts[pts.length - 1][1])}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
