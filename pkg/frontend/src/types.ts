// Payload shapes of the backend API. Field names mirror the wire format.

export interface DatabaseEntry {
  db_id: string;
  table_count: number;
}

export interface ColumnPayload {
  name: string;
  affinity: string;
  is_primary_key: boolean;
  most_frequent: string | null;
}

export interface TablePayload {
  name: string;
  row_count: number;
  columns: ColumnPayload[];
}

export interface SchemaPayload {
  db_id: string;
  tables: TablePayload[];
  foreign_keys: [string, string][];
}

export interface RowPage {
  table: string;
  columns: string[];
  rows: unknown[][];
}

export interface SpanPayload {
  start: number;
  end: number;
  kind: 'schema_mention' | 'value_note' | 'diff';
  role?: 'table' | 'column';
  name?: string;
  others?: number[];
}

export interface StepPayload {
  text: string;
  spans: SpanPayload[];
}

export interface ExplanationPayload {
  steps: StepPayload[];
  tier: 'shallow' | 'deep';
  value_notes: string[];
}

export interface HypothesisPayload {
  id: number;
  sql: string;
  weighted_score: number;
  valid: boolean;
  explanation: ExplanationPayload;
  value_notes: string[];
  default_display: boolean;
}

export interface QueryResponse {
  question: string;
  hypotheses: HypothesisPayload[];
  tier_stats: { shallow: number; deep: number };
}

export interface ExecutionPayload {
  columns: string[];
  rows: unknown[][];
  truncated: boolean;
  elapsed: number;
}
