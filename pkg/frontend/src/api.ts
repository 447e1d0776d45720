// Thin API client. The base URL is configurable (same-origin by default,
// window.NLDB_API_BASE or ?api= to point elsewhere).

import type {
  DatabaseEntry,
  ExecutionPayload,
  QueryResponse,
  RowPage,
  SchemaPayload,
} from './types.js';

export function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  const override = params.get('api') ?? (window as any).NLDB_API_BASE;
  return (override ?? '').replace(/\/$/, '');
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(`${apiBase()}${path}`, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export const listDatabases = () => request<DatabaseEntry[]>('/api/databases');

export const getSchema = (dbId: string) =>
  request<SchemaPayload>(`/api/databases/${encodeURIComponent(dbId)}/schema`);

export const getTablePage = (dbId: string, table: string, limit = 8) =>
  request<RowPage>(
    `/api/databases/${encodeURIComponent(dbId)}/tables/${encodeURIComponent(table)}?limit=${limit}`
  );

export function postQuery(
  dbId: string,
  question: string,
  signal?: AbortSignal
): Promise<QueryResponse> {
  return request<QueryResponse>('/api/query', {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ db_id: dbId, question }),
    signal,
  });
}

export function postExecute(dbId: string, sql: string): Promise<ExecutionPayload> {
  return request<ExecutionPayload>('/api/execute', {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ db_id: dbId, hypothesis_sql: sql }),
  });
}
