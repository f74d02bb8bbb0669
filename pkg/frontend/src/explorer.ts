// Explorer state core: the query document, axis shelves, undo stack and
// stale-response bookkeeping. Deliberately DOM-free and computation-free --
// the grid is whatever the last committed bridge payload said, and every
// mutation goes through a staged seq so out-of-order responses are dropped.

import type { QueryOp, ResultDoc, SchemaDoc, SessionBundle } from './types.js';

export const ALL_LEVEL = 'ALL';

interface Snapshot {
  ops: QueryOp[];
  rows: string[];
  cols: string[];
}

export class Explorer {
  ops: QueryOp[] = [];
  rows: string[];
  cols: string[] = [];
  grid: ResultDoc | null = null;
  raw = ''; // exact payload bytes of the committed grid
  undoStack: Snapshot[] = [];

  private seq = 0;
  private staged: { seq: number; prev: Snapshot } | null = null;

  constructor(readonly schema: SchemaDoc) {
    this.rows = schema.dimensions.map((d) => d.name);
  }

  // -- level derivation ----------------------------------------------------

  /** Current level per dimension, replaying the op list; null = absent. */
  currentLevels(): Record<string, string | null> {
    const levels: Record<string, string | null> = {};
    for (const dim of this.schema.dimensions) levels[dim.name] = dim.levels[0];
    for (const op of this.ops) {
      if (op.op === 'rollup') levels[op.dimension] = op.level === ALL_LEVEL ? null : op.level;
      else if (op.op === 'drilldown') levels[op.dimension] = op.level;
      else if (op.op === 'slice') levels[op.dimension] = null;
    }
    return levels;
  }

  presentDimensions(): string[] {
    const levels = this.currentLevels();
    return this.schema.dimensions.map((d) => d.name).filter((name) => levels[name] !== null);
  }

  /** Strictly coarser levels than the current one, then ALL. */
  legalRollupTargets(dimension: string): string[] {
    const dim = this.schema.dimensions.find((d) => d.name === dimension);
    const current = this.currentLevels()[dimension];
    if (!dim || current === null || current === undefined) return [];
    return [...dim.levels.slice(dim.levels.indexOf(current) + 1), ALL_LEVEL];
  }

  /** Strictly finer levels; an absent dimension counts as coarsest. */
  legalDrilldownTargets(dimension: string): string[] {
    const dim = this.schema.dimensions.find((d) => d.name === dimension);
    if (!dim) return [];
    const current = this.currentLevels()[dimension];
    if (current === null) return [...dim.levels];
    return dim.levels.slice(0, dim.levels.indexOf(current ?? dim.levels[0]));
  }

  membersAtCurrentLevel(dimension: string): string[] {
    const dim = this.schema.dimensions.find((d) => d.name === dimension);
    const current = this.currentLevels()[dimension];
    if (!dim || current === null || current === undefined) return [];
    return dim.members[current] ?? [];
  }

  // -- document ------------------------------------------------------------

  /** The replayable query document: applied ops plus the final arrangement. */
  queryDocument(): QueryOp[] {
    return [...this.ops, { op: 'view', rows: [...this.rows], cols: [...this.cols] }];
  }

  exportBundle(factsCsv: string): SessionBundle {
    return {
      schema_document: this.schema,
      facts_csv: factsCsv,
      query_document: this.queryDocument(),
    };
  }

  // -- staged mutations ----------------------------------------------------

  private snapshot(): Snapshot {
    return { ops: [...this.ops], rows: [...this.rows], cols: [...this.cols] };
  }

  private restore(snap: Snapshot): void {
    this.ops = [...snap.ops];
    this.rows = [...snap.rows];
    this.cols = [...snap.cols];
  }

  private trackShelves(op: QueryOp): void {
    if (op.op === 'slice' || (op.op === 'rollup' && op.level === ALL_LEVEL)) {
      this.rows = this.rows.filter((d) => d !== op.dimension);
      this.cols = this.cols.filter((d) => d !== op.dimension);
    } else if (op.op === 'drilldown') {
      if (!this.rows.includes(op.dimension) && !this.cols.includes(op.dimension)) {
        this.rows.push(op.dimension);
      }
    }
  }

  /** Append a cube operation; returns the seq the response must carry. */
  apply(op: QueryOp): number {
    this.staged = { seq: ++this.seq, prev: this.snapshot() };
    this.ops.push(op);
    this.trackShelves(op);
    return this.seq;
  }

  /** Adopt a whole document (bundle import); no undo history survives. */
  importOperations(ops: QueryOp[]): number {
    this.ops = [];
    this.rows = this.schema.dimensions.map((d) => d.name);
    this.cols = [];
    for (const op of ops) {
      if (op.op === 'view' || op.op === 'pivot') {
        this.rows = [...op.rows];
        this.cols = [...op.cols];
      } else {
        this.ops.push(op);
        this.trackShelves(op);
      }
    }
    this.staged = null;
    this.undoStack = [];
    return ++this.seq;
  }

  /** Move dimensions between shelves; a pure arrangement change. */
  pivotTo(rows: string[], cols: string[]): number {
    const present = this.presentDimensions();
    const claimed = [...rows, ...cols];
    if (
      claimed.length !== present.length ||
      new Set(claimed).size !== claimed.length ||
      !present.every((d) => claimed.includes(d))
    ) {
      throw new Error(`axes [${claimed}] must cover exactly [${present}]`);
    }
    this.staged = { seq: ++this.seq, prev: this.snapshot() };
    this.rows = [...rows];
    this.cols = [...cols];
    return this.seq;
  }

  /** Restore the previous document and arrangement; caller re-queries. */
  undo(): number | null {
    const snap = this.undoStack.pop();
    if (!snap) return null;
    this.staged = null;
    this.restore(snap);
    return ++this.seq;
  }

  /** Reset to the freshly-loaded state; caller re-queries. */
  reset(): number {
    this.staged = null;
    this.undoStack = [];
    this.ops = [];
    this.rows = this.schema.dimensions.map((d) => d.name);
    this.cols = [];
    return ++this.seq;
  }

  /** Adopt a bridge payload; stale seqs are discarded. */
  commit(seq: number, grid: ResultDoc, raw: string): boolean {
    if (seq !== this.seq) return false;
    this.grid = grid;
    this.raw = raw;
    if (this.staged && this.staged.seq === seq) {
      this.undoStack.push(this.staged.prev);
      this.staged = null;
    }
    return true;
  }

  /** A bridge error leaves state exactly as before the staged change. */
  rollback(seq: number): void {
    if (this.staged && this.staged.seq === seq) {
      this.restore(this.staged.prev);
      this.staged = null;
    }
  }

  get latestSeq(): number {
    return this.seq;
  }
}
