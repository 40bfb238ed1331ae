// SVG line chart: one line per term, shared y-axis, optional log scale.
// Zero-valued series still get a (flat) line so "no activity" is visible.

import { Normalize, QueryFormState } from "./state.js";
import { TermSeries } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 900;
const HEIGHT = 320;
const MARGIN = { top: 12, right: 16, bottom: 28, left: 56 };

export const LINE_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#e377c2",
  "#17becf",
];

function values(series: TermSeries, normalize: Normalize): number[] {
  return series.points.map((p) => (normalize === "relative" ? p.relative : p.absolute));
}

function yScale(maxValue: number, logScale: boolean): (v: number) => number {
  const innerHeight = HEIGHT - MARGIN.top - MARGIN.bottom;
  if (!logScale) {
    const top = maxValue > 0 ? maxValue : 1;
    return (v) => MARGIN.top + innerHeight * (1 - v / top);
  }
  // log scale: zeros sit on the baseline rather than at -infinity
  const top = Math.log10(maxValue > 0 ? maxValue : 1) + 1;
  return (v) => {
    const logged = v > 0 ? Math.log10(v) + 1 : 0;
    return MARGIN.top + innerHeight * (1 - logged / (top > 0 ? top : 1));
  };
}

export function renderChart(container: HTMLElement, series: TermSeries[], state: QueryFormState): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "chart");
  svg.setAttribute("role", "img");

  const nPoints = series.length ? series[0].points.length : 0;
  const innerWidth = WIDTH - MARGIN.left - MARGIN.right;
  const maxValue = Math.max(0, ...series.flatMap((s) => values(s, state.normalize)));
  const y = yScale(maxValue, state.logScale);
  const x = (i: number) => MARGIN.left + (nPoints > 1 ? (i / (nPoints - 1)) * innerWidth : innerWidth / 2);

  const axis = doc.createElementNS(SVG_NS, "line");
  axis.setAttribute("x1", String(MARGIN.left));
  axis.setAttribute("y1", String(HEIGHT - MARGIN.bottom));
  axis.setAttribute("x2", String(WIDTH - MARGIN.right));
  axis.setAttribute("y2", String(HEIGHT - MARGIN.bottom));
  axis.setAttribute("class", "axis");
  svg.appendChild(axis);

  series.forEach((s, index) => {
    const line = doc.createElementNS(SVG_NS, "polyline");
    const points = values(s, state.normalize)
      .map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`)
      .join(" ");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", LINE_COLORS[index % LINE_COLORS.length]);
    line.setAttribute("stroke-width", "1.5");
    line.setAttribute("data-term", s.term);
    svg.appendChild(line);
  });

  if (nPoints > 0) {
    const first = doc.createElementNS(SVG_NS, "text");
    first.setAttribute("x", String(MARGIN.left));
    first.setAttribute("y", String(HEIGHT - 8));
    first.setAttribute("class", "tick");
    first.textContent = series[0].points[0].date;
    svg.appendChild(first);
    const last = doc.createElementNS(SVG_NS, "text");
    last.setAttribute("x", String(WIDTH - MARGIN.right));
    last.setAttribute("y", String(HEIGHT - 8));
    last.setAttribute("text-anchor", "end");
    last.setAttribute("class", "tick");
    last.textContent = series[0].points[nPoints - 1].date;
    svg.appendChild(last);
  }

  container.appendChild(svg);

  const legend = doc.createElement("div");
  legend.className = "legend";
  series.forEach((s, index) => {
    const item = doc.createElement("span");
    item.className = "legend-item";
    const swatch = doc.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = LINE_COLORS[index % LINE_COLORS.length];
    const label = doc.createElement("span");
    label.textContent = s.term;
    item.appendChild(swatch);
    item.appendChild(label);
    legend.appendChild(item);
  });
  container.appendChild(legend);
}
