// Pivot-grid presentation model. Pure passthrough of a result document into
// rows of display strings; the only derived figures are the per-row sums and
// the grand total of the first measure, each a direct fold over the payload
// (re-derivable by any test that intercepts bridge traffic).

import type { GridCell, ResultDoc } from './types.js';

export interface GridModel {
  measure: string;
  columnLabels: string[]; // one per column header tuple
  rowLabels: string[]; // one per row header tuple
  cells: (string | null)[][];
  rowTotals: (number | null)[];
  grandTotal: number;
  nonEmpty: number;
}

export function formatValue(cell: GridCell, measure: string): string | null {
  if (cell === null) return null;
  const value = cell[measure];
  return Number.isInteger(value) ? String(value) : value.toPrecision(12).replace(/\.?0+$/, '');
}

export function headerLabel(header: string[]): string {
  return header.length === 0 ? 'Σ' : header.join(' / ');
}

export function gridModel(doc: ResultDoc, measure?: string): GridModel {
  const m = measure ?? doc.measures[0];
  let nonEmpty = 0;
  let grandTotal = 0;
  const cells = doc.values.map((row) =>
    row.map((cell) => {
      if (cell !== null) {
        nonEmpty += 1;
        grandTotal += cell[m];
      }
      return formatValue(cell, m);
    }),
  );
  const rowTotals = doc.values.map((row) => {
    const present = row.filter((cell): cell is Record<string, number> => cell !== null);
    if (present.length === 0) return null;
    return present.reduce((acc, cell) => acc + cell[m], 0);
  });
  return {
    measure: m,
    columnLabels: doc.col_headers.map(headerLabel),
    rowLabels: doc.row_headers.map(headerLabel),
    cells,
    rowTotals,
    grandTotal,
    nonEmpty,
  };
}

export function renderGrid(container: HTMLElement, doc: ResultDoc, measure?: string): void {
  const model = gridModel(doc, measure);
  container.textContent = '';
  if (model.nonEmpty === 0) {
    const empty = document.createElement('p');
    empty.className = 'placeholder';
    empty.textContent = 'No cells match the current selection.';
    container.appendChild(empty);
    return;
  }
  const table = document.createElement('table');
  table.className = 'grid';

  const head = table.createTHead().insertRow();
  head.appendChild(document.createElement('th')).textContent =
    doc.row_axes.join(' / ') || ' ';
  for (const label of model.columnLabels) {
    head.appendChild(document.createElement('th')).textContent = label;
  }
  head.appendChild(document.createElement('th')).textContent = 'Σ row';

  const body = table.createTBody();
  model.rowLabels.forEach((label, r) => {
    const tr = body.insertRow();
    const th = document.createElement('th');
    th.textContent = label;
    tr.appendChild(th);
    model.cells[r].forEach((cell) => {
      const td = tr.insertCell();
      td.textContent = cell ?? '·';
      if (cell === null) td.className = 'empty';
    });
    const total = tr.insertCell();
    total.className = 'total';
    total.textContent = model.rowTotals[r] === null ? '·' : String(model.rowTotals[r]);
  });

  const foot = table.createTFoot().insertRow();
  foot.appendChild(document.createElement('th')).textContent = `Σ ${model.measure}`;
  const totalCell = foot.insertCell();
  totalCell.colSpan = model.columnLabels.length + 1;
  totalCell.className = 'total';
  totalCell.textContent = String(model.grandTotal);

  container.appendChild(table);
}
