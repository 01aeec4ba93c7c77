// Typed client for the query service. The console never recomputes
// costs: whatever the service returns is displayed verbatim.

export interface RankedEntry {
  rank: number;
  id: string;
  display_name: string;
  class_name: string;
  cost: number;
  mirrored: boolean;
  shift: number;
}

export interface QueryResponse {
  version: number;
  query_sha256: string;
  params: Record<string, number | null>;
  total_models: number;
  entries: RankedEntry[];
}

export interface ModelInfo {
  id: string;
  display_name: string;
  class_name: string;
  silhouette: number[][]; // closed polyline, [x, y] pairs, unit perimeter
  deck_span: number[];
  bow_index: number;
  stern_index: number;
}

export interface HealthInfo {
  status: string;
  models: number;
  schedule_rows: number;
}

export interface DecisionOutcome {
  logged: boolean;
  duplicate: boolean;
}

export class ServiceError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
  }
}

async function expectOk(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // non-JSON error body; keep the status code
    }
    throw new ServiceError(detail, resp.status);
  }
  return resp;
}

export class ApiClient {
  constructor(readonly base: string = '') {}

  async health(): Promise<HealthInfo> {
    const resp = await expectOk(await fetch(`${this.base}/api/health`));
    return resp.json();
  }

  async query(mask: Blob, topK: number): Promise<{ doc: QueryResponse; rawText: string }> {
    const form = new FormData();
    form.append('mask', mask, 'mask.png');
    const resp = await expectOk(
      await fetch(`${this.base}/api/query?top_k=${topK}`, { method: 'POST', body: form }),
    );
    const rawText = await resp.text();
    return { doc: JSON.parse(rawText) as QueryResponse, rawText };
  }

  async model(id: string): Promise<ModelInfo> {
    const resp = await expectOk(await fetch(`${this.base}/api/models/${encodeURIComponent(id)}`));
    return resp.json();
  }

  async decide(
    querySha256: string,
    modelId: string,
    note: string,
    idempotencyKey: string,
  ): Promise<DecisionOutcome> {
    const resp = await expectOk(
      await fetch(`${this.base}/api/decisions`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({
          query_sha256: querySha256,
          model_id: modelId,
          note,
          idempotency_key: idempotencyKey,
        }),
      }),
    );
    return resp.json();
  }
}

/**
 * Exact cost text as it appeared on the wire, extracted from the raw
 * response body so the display is byte-equal to what the service sent.
 */
export function costTextFromRaw(rawText: string, entry: RankedEntry): string {
  const marker = `"id":${JSON.stringify(entry.id)}`;
  let from = 0;
  while (true) {
    const idAt = rawText.indexOf(marker, from);
    if (idAt < 0) break;
    // entries serialize with sorted keys: "cost" precedes "id" in the
    // same object; scan back for the nearest cost field
    const costAt = rawText.lastIndexOf('"cost":', idAt);
    if (costAt >= 0) {
      const start = costAt + '"cost":'.length;
      const end = rawText.indexOf(',', start);
      const text = rawText.slice(start, end < 0 ? undefined : end).trim();
      if (String(entry.cost) === text || Number(text) === entry.cost) return text;
    }
    from = idAt + marker.length;
  }
  return String(entry.cost);
}
