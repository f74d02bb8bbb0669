// Studio wiring: file loading, toolbar construction (only legal targets are
// ever offered), shelf drag & drop, undo/reset, bundle export/import, and
// the render loop. All computation happens on the server; at most one query
// is in flight and stale responses are dropped by the explorer's seq check.

import { ServiceClient } from './client.js';
import { ALL_LEVEL, Explorer } from './explorer.js';
import { renderChart } from './chart.js';
import { renderGrid } from './grid.js';
import type { ErrorDoc, QueryOp, SchemaDoc, SessionBundle } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

interface Studio {
  client: ServiceClient;
  explorer: Explorer;
  session: number;
  factsCsv: string;
}

let studio: Studio | null = null;

function setStatus(text: string, isError = false): void {
  const el = $('status');
  el.textContent = text;
  el.className = isError ? 'status error' : 'status';
}

function showValidation(error: ErrorDoc): void {
  const panel = $('validation');
  panel.textContent = '';
  const title = document.createElement('h3');
  title.textContent = `Load failed: ${error.message}`;
  panel.appendChild(title);
  const report = (error.details?.report ?? null) as {
    orphan_references?: { row: number; dimension: string; member: string }[];
    granularity_violations?: { dimension: string; detail: string }[];
  } | null;
  if (report) {
    const list = document.createElement('ul');
    for (const orphan of report.orphan_references ?? []) {
      const li = document.createElement('li');
      li.textContent = `row ${orphan.row}: dimension ${orphan.dimension} has unknown member '${orphan.member}'`;
      list.appendChild(li);
    }
    for (const violation of report.granularity_violations ?? []) {
      const li = document.createElement('li');
      li.textContent = `dimension ${violation.dimension}: ${violation.detail}`;
      list.appendChild(li);
    }
    panel.appendChild(list);
  }
  panel.hidden = false;
}

async function runQuery(seq: number): Promise<void> {
  if (!studio) return;
  const { client, explorer, session } = studio;
  const response = await client.query(session, explorer.queryDocument());
  if (!response.ok) {
    explorer.rollback(seq);
    setStatus(`${response.error.code}: ${response.error.message}`, true);
    return;
  }
  if (!explorer.commit(seq, response.result, response.raw)) return; // stale
  setStatus(`${explorer.ops.length} operation(s) applied`);
  render();
}

function render(): void {
  const explorer = studio?.explorer;
  const grid = explorer?.grid;
  if (!explorer || !grid) return;
  renderGrid($('grid'), grid);
  const kind = ($('chart-kind') as HTMLSelectElement).value;
  const chartBox = $('chart');
  if (kind === 'bar' || kind === 'line') {
    chartBox.hidden = false;
    renderChart(chartBox, grid, kind);
  } else {
    chartBox.hidden = true;
  }
  renderShelves();
  renderToolbar();
  ($('undo') as HTMLButtonElement).disabled = explorer.undoStack.length === 0;
  $('doc-preview').textContent = JSON.stringify(explorer.queryDocument(), null, 2);
}

function dimensionChip(name: string, shelf: 'rows' | 'cols'): HTMLElement {
  const chip = document.createElement('span');
  chip.className = 'chip';
  chip.draggable = true;
  chip.textContent = name;
  chip.dataset.dimension = name;
  chip.addEventListener('dragstart', (event) => {
    event.dataTransfer?.setData('text/plain', name);
  });
  const move = document.createElement('button');
  move.textContent = shelf === 'rows' ? '→ cols' : '→ rows';
  move.title = `move ${name} to the ${shelf === 'rows' ? 'column' : 'row'} shelf`;
  move.addEventListener('click', () => moveDimension(name, shelf === 'rows' ? 'cols' : 'rows'));
  chip.appendChild(move);
  return chip;
}

function moveDimension(name: string, target: 'rows' | 'cols'): void {
  if (!studio) return;
  const explorer = studio.explorer;
  const rows = explorer.rows.filter((d) => d !== name);
  const cols = explorer.cols.filter((d) => d !== name);
  (target === 'rows' ? rows : cols).push(name);
  void runQuery(explorer.pivotTo(rows, cols));
}

function renderShelves(): void {
  if (!studio) return;
  const explorer = studio.explorer;
  for (const [shelf, dims] of [
    ['rows', explorer.rows],
    ['cols', explorer.cols],
  ] as const) {
    const el = $(`shelf-${shelf}`);
    el.textContent = '';
    for (const dim of dims) el.appendChild(dimensionChip(dim, shelf));
  }
}

function fillSelect(select: HTMLSelectElement, options: string[]): void {
  select.textContent = '';
  for (const option of options) {
    const el = document.createElement('option');
    el.value = option;
    el.textContent = option;
    select.appendChild(el);
  }
  select.disabled = options.length === 0;
}

function renderToolbar(): void {
  if (!studio) return;
  const explorer = studio.explorer;
  const dimSelect = $('op-dimension') as HTMLSelectElement;
  const previous = dimSelect.value;
  const levels = explorer.currentLevels();
  const all = explorer.schema.dimensions.map((d) => d.name);
  fillSelect(dimSelect, all);
  if (all.includes(previous)) dimSelect.value = previous;
  const dimension = dimSelect.value;

  fillSelect($('rollup-level') as HTMLSelectElement, explorer.legalRollupTargets(dimension));
  fillSelect($('drill-level') as HTMLSelectElement, explorer.legalDrilldownTargets(dimension));
  fillSelect($('slice-member') as HTMLSelectElement, explorer.membersAtCurrentLevel(dimension));
  ($('rollup-apply') as HTMLButtonElement).disabled =
    explorer.legalRollupTargets(dimension).length === 0;
  ($('drill-apply') as HTMLButtonElement).disabled =
    explorer.legalDrilldownTargets(dimension).length === 0;
  ($('slice-apply') as HTMLButtonElement).disabled =
    levels[dimension] === null || explorer.membersAtCurrentLevel(dimension).length === 0;

  const diceBox = $('dice-members');
  diceBox.textContent = '';
  for (const member of explorer.membersAtCurrentLevel(dimension)) {
    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = member;
    label.appendChild(box);
    label.append(member);
    diceBox.appendChild(label);
  }
  ($('dice-apply') as HTMLButtonElement).disabled = levels[dimension] === null;
}

function applyOp(op: QueryOp): void {
  if (!studio) return;
  void runQuery(studio.explorer.apply(op));
}

async function loadDataset(schema: SchemaDoc, factsCsv: string, ops: QueryOp[] = []): Promise<void> {
  const base = ($('service-url') as HTMLInputElement).value.replace(/\/$/, '');
  const client = new ServiceClient(base);
  setStatus('loading…');
  $('validation').hidden = true;
  const created = await client.createSession(schema, factsCsv);
  if (!created.ok) {
    setStatus('validation failed', true);
    showValidation(created.error);
    return;
  }
  if (studio) void studio.client.free(studio.session);
  const explorer = new Explorer(schema);
  studio = { client, explorer, session: created.session, factsCsv };
  $('workspace').hidden = false;
  await runQuery(explorer.importOperations(ops));
}

function wire(): void {
  $('load').addEventListener('click', async () => {
    const schemaFile = ($('schema-file') as HTMLInputElement).files?.[0];
    const factsFile = ($('facts-file') as HTMLInputElement).files?.[0];
    if (!schemaFile || !factsFile) {
      setStatus('choose both a schema JSON file and a facts CSV file', true);
      return;
    }
    try {
      const schema = JSON.parse(await schemaFile.text()) as SchemaDoc;
      await loadDataset(schema, await factsFile.text());
    } catch (err) {
      setStatus(String(err), true);
    }
  });

  $('rollup-apply').addEventListener('click', () => {
    applyOp({
      op: 'rollup',
      dimension: ($('op-dimension') as HTMLSelectElement).value,
      level: ($('rollup-level') as HTMLSelectElement).value || ALL_LEVEL,
    });
  });
  $('drill-apply').addEventListener('click', () => {
    applyOp({
      op: 'drilldown',
      dimension: ($('op-dimension') as HTMLSelectElement).value,
      level: ($('drill-level') as HTMLSelectElement).value,
    });
  });
  $('slice-apply').addEventListener('click', () => {
    applyOp({
      op: 'slice',
      dimension: ($('op-dimension') as HTMLSelectElement).value,
      member: ($('slice-member') as HTMLSelectElement).value,
    });
  });
  $('dice-apply').addEventListener('click', () => {
    const dimension = ($('op-dimension') as HTMLSelectElement).value;
    const members = Array.from(
      $('dice-members').querySelectorAll<HTMLInputElement>('input:checked'),
    ).map((box) => box.value);
    if (members.length === 0) {
      setStatus('pick at least one member to dice on', true);
      return;
    }
    applyOp({ op: 'dice', filter: { [dimension]: members } });
  });

  $('op-dimension').addEventListener('change', renderToolbar);
  $('chart-kind').addEventListener('change', render);

  $('undo').addEventListener('click', () => {
    const seq = studio?.explorer.undo();
    if (seq) void runQuery(seq);
  });
  $('reset').addEventListener('click', () => {
    if (!studio) return;
    void studio.client.reset(studio.session);
    void runQuery(studio.explorer.reset());
  });

  $('export').addEventListener('click', () => {
    if (!studio) return;
    const bundle = studio.explorer.exportBundle(studio.factsCsv);
    const blob = new Blob([JSON.stringify(bundle, null, 2)], { type: 'application/json' });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    link.download = 'session-bundle.json';
    link.click();
    URL.revokeObjectURL(link.href);
  });
  $('import-file').addEventListener('change', async () => {
    const file = ($('import-file') as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      const bundle = JSON.parse(await file.text()) as SessionBundle;
      await loadDataset(bundle.schema_document, bundle.facts_csv, bundle.query_document);
    } catch (err) {
      setStatus(String(err), true);
    }
  });

  for (const shelf of ['rows', 'cols'] as const) {
    const el = $(`shelf-${shelf}`);
    el.addEventListener('dragover', (event) => event.preventDefault());
    el.addEventListener('drop', (event) => {
      event.preventDefault();
      const name = event.dataTransfer?.getData('text/plain');
      if (name) moveDimension(name, shelf);
    });
  }
}

wire();
