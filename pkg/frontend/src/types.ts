// Shared wire shapes: the schema document, the query documents sent to the
// engine, and the result documents that are the only source of numbers in
// this UI.

export interface DimensionDoc {
  name: string;
  levels: string[]; // finest -> coarsest
  members: Record<string, string[]>;
  parents?: Record<string, Record<string, string>>;
}

export interface MeasureDoc {
  name: string;
  kind: 'integer' | 'real';
}

export interface SchemaDoc {
  dimensions: DimensionDoc[];
  measures: MeasureDoc[];
}

export type QueryOp =
  | { op: 'rollup'; dimension: string; level: string }
  | { op: 'drilldown'; dimension: string; level: string }
  | { op: 'slice'; dimension: string; member: string }
  | { op: 'dice'; filter: Record<string, string[]> }
  | { op: 'view'; rows: string[]; cols: string[] }
  | { op: 'pivot'; rows: string[]; cols: string[] };

export type GridCell = Record<string, number> | null;

export interface ResultDoc {
  measures: string[];
  row_axes: string[];
  col_axes: string[];
  row_headers: string[][];
  col_headers: string[][];
  values: GridCell[][];
}

export interface ErrorDoc {
  code: string;
  message: string;
  details?: Record<string, unknown>;
}

export type QueryResponse =
  | { ok: true; result: ResultDoc; raw: string }
  | { ok: false; error: ErrorDoc };

// A replayable analysis artifact: everything needed to reproduce the
// on-screen grid through `cube query`.
export interface SessionBundle {
  schema_document: SchemaDoc;
  facts_csv: string;
  query_document: QueryOp[];
}
