// Thin HTTP client for the bridge host. The raw response text is kept
// alongside the parsed result so replay tests can compare bytes with the
// native CLI output.

import type { ErrorDoc, QueryOp, QueryResponse, ResultDoc, SchemaDoc } from './types.js';

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  async health(): Promise<boolean> {
    try {
      const res = await fetch(`${this.baseUrl}/health`);
      return res.ok;
    } catch {
      return false;
    }
  }

  async createSession(
    schema: SchemaDoc,
    factsCsv: string,
  ): Promise<{ ok: true; session: number } | { ok: false; error: ErrorDoc }> {
    const res = await fetch(`${this.baseUrl}/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ schema_document: schema, facts_csv: factsCsv }),
    });
    const body = await res.json();
    if (!res.ok) return { ok: false, error: body as ErrorDoc };
    return { ok: true, session: (body as { session: number }).session };
  }

  async query(session: number, doc: QueryOp[]): Promise<QueryResponse> {
    const res = await fetch(`${this.baseUrl}/sessions/${session}/query`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(doc),
    });
    const raw = await res.text();
    if (!res.ok) return { ok: false, error: JSON.parse(raw) as ErrorDoc };
    return { ok: true, result: JSON.parse(raw) as ResultDoc, raw };
  }

  async reset(session: number): Promise<void> {
    await fetch(`${this.baseUrl}/sessions/${session}/reset`, { method: 'POST' });
  }

  async free(session: number): Promise<void> {
    await fetch(`${this.baseUrl}/sessions/${session}`, { method: 'DELETE' });
  }
}
