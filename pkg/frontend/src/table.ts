// Data table below the chart. Cell text is the raw API number rendered
// with String(); nothing is rounded client-side.

import { Normalize } from "./state.js";
import { TermSeries } from "./api.js";

export function renderTable(container: HTMLElement, series: TermSeries[], normalize: Normalize): void {
  container.textContent = "";
  if (series.length === 0) return;
  const doc = container.ownerDocument;
  const table = doc.createElement("table");
  table.className = "data-table";

  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  for (const label of ["date", ...series.map((s) => s.term)]) {
    const th = doc.createElement("th");
    th.textContent = label;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = doc.createElement("tbody");
  const nPoints = series[0].points.length;
  for (let i = 0; i < nPoints; i++) {
    const row = doc.createElement("tr");
    const dateCell = doc.createElement("td");
    dateCell.textContent = series[0].points[i].date;
    row.appendChild(dateCell);
    for (const s of series) {
      const cell = doc.createElement("td");
      const point = s.points[i];
      const value = normalize === "relative" ? point.relative : point.absolute;
      cell.textContent = String(value);
      cell.dataset.term = s.term;
      cell.dataset.date = point.date;
      row.appendChild(cell);
    }
    tbody.appendChild(row);
  }
  table.appendChild(tbody);
  container.appendChild(table);
}
