/** Dependency-free SVG line charts for the training dashboard.
 *
 * Each series renders one polyline plus one circle marker per epoch, so a
 * completed 5-epoch run shows exactly 5 points per series.
 */

import type { RunEpochRow } from "./types.js";

export interface Series {
  name: string;
  color: string;
  values: number[];
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const MARGIN = { top: 28, right: 16, bottom: 34, left: 48 };

function svgElement<K extends keyof SVGElementTagNameMap>(
  doc: Document,
  tag: K,
): SVGElementTagNameMap[K] {
  return doc.createElementNS(SVG_NS, tag);
}

export function lineChart(doc: Document, series: Series[], options: ChartOptions): SVGSVGElement {
  const width = options.width ?? 560;
  const height = options.height ?? 260;
  const plotWidth = width - MARGIN.left - MARGIN.right;
  const plotHeight = height - MARGIN.top - MARGIN.bottom;
  const epochs = Math.max(0, ...series.map((s) => s.values.length));
  const values = series.flatMap((s) => s.values);
  const yMax = values.length ? Math.max(...values) : 1;
  const yMin = values.length ? Math.min(...values, 0) : 0;
  const ySpan = yMax - yMin || 1;

  const x = (epoch: number) =>
    MARGIN.left + (epochs <= 1 ? plotWidth / 2 : ((epoch - 1) / (epochs - 1)) * plotWidth);
  const y = (value: number) => MARGIN.top + plotHeight - ((value - yMin) / ySpan) * plotHeight;

  const svg = svgElement(doc, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "chart");
  svg.setAttribute("role", "img");

  const title = svgElement(doc, "text");
  title.setAttribute("x", String(width / 2));
  title.setAttribute("y", "16");
  title.setAttribute("class", "chart-title");
  title.setAttribute("text-anchor", "middle");
  title.textContent = options.title;
  svg.appendChild(title);

  // axes
  for (const [x1, y1, x2, y2] of [
    [MARGIN.left, MARGIN.top, MARGIN.left, MARGIN.top + plotHeight],
    [MARGIN.left, MARGIN.top + plotHeight, MARGIN.left + plotWidth, MARGIN.top + plotHeight],
  ]) {
    const axis = svgElement(doc, "line");
    axis.setAttribute("x1", String(x1));
    axis.setAttribute("y1", String(y1));
    axis.setAttribute("x2", String(x2));
    axis.setAttribute("y2", String(y2));
    axis.setAttribute("class", "axis");
    svg.appendChild(axis);
  }
  const xLabel = svgElement(doc, "text");
  xLabel.setAttribute("x", String(MARGIN.left + plotWidth / 2));
  xLabel.setAttribute("y", String(height - 6));
  xLabel.setAttribute("text-anchor", "middle");
  xLabel.setAttribute("class", "axis-label x-label");
  xLabel.textContent = options.xLabel;
  svg.appendChild(xLabel);
  const yLabel = svgElement(doc, "text");
  yLabel.setAttribute("transform", `translate(12 ${MARGIN.top + plotHeight / 2}) rotate(-90)`);
  yLabel.setAttribute("text-anchor", "middle");
  yLabel.setAttribute("class", "axis-label y-label");
  yLabel.textContent = options.yLabel;
  svg.appendChild(yLabel);

  for (let epoch = 1; epoch <= epochs; epoch++) {
    const tick = svgElement(doc, "text");
    tick.setAttribute("x", String(x(epoch)));
    tick.setAttribute("y", String(MARGIN.top + plotHeight + 16));
    tick.setAttribute("text-anchor", "middle");
    tick.setAttribute("class", "tick");
    tick.textContent = String(epoch);
    svg.appendChild(tick);
  }

  for (const s of series) {
    if (s.values.length > 1) {
      const line = svgElement(doc, "polyline");
      line.setAttribute(
        "points",
        s.values.map((v, i) => `${x(i + 1)},${y(v)}`).join(" "),
      );
      line.setAttribute("fill", "none");
      line.setAttribute("stroke", s.color);
      line.setAttribute("stroke-width", "2");
      line.setAttribute("class", `series-line series-${s.name}`);
      svg.appendChild(line);
    }
    s.values.forEach((v, i) => {
      const dot = svgElement(doc, "circle");
      dot.setAttribute("cx", String(x(i + 1)));
      dot.setAttribute("cy", String(y(v)));
      dot.setAttribute("r", "3");
      dot.setAttribute("fill", s.color);
      dot.setAttribute("class", `series-point series-${s.name}`);
      const label = svgElement(doc, "title");
      label.textContent = `${s.name} epoch ${i + 1}: ${v.toFixed(6)}`;
      dot.appendChild(label);
      svg.appendChild(dot);
    });
    const legend = svgElement(doc, "text");
    legend.setAttribute("x", String(MARGIN.left + 8 + 110 * series.indexOf(s)));
    legend.setAttribute("y", String(MARGIN.top - 6));
    legend.setAttribute("fill", s.color);
    legend.setAttribute("class", "legend");
    legend.textContent = s.name;
    svg.appendChild(legend);
  }
  return svg;
}

/** The dashboard's two fixed charts: losses, then the four score metrics. */
export function buildDashboardCharts(doc: Document, history: RunEpochRow[]): SVGSVGElement[] {
  const lossChart = lineChart(
    doc,
    [
      { name: "training_loss", color: "#2563eb", values: history.map((r) => r.training_loss) },
      { name: "validation_loss", color: "#dc2626", values: history.map((r) => r.validation_loss) },
    ],
    { title: "Training and Validation Loss", xLabel: "Epoch", yLabel: "Loss" },
  );
  const metricChart = lineChart(
    doc,
    [
      { name: "precision", color: "#2563eb", values: history.map((r) => r.precision) },
      { name: "recall", color: "#dc2626", values: history.map((r) => r.recall) },
      { name: "f1", color: "#059669", values: history.map((r) => r.f1) },
      { name: "accuracy", color: "#d97706", values: history.map((r) => r.accuracy) },
    ],
    { title: "Precision, Recall, F1, Accuracy", xLabel: "Epoch", yLabel: "Score" },
  );
  return [lossChart, metricChart];
}
