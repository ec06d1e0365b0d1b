import {
  CatalogEntry,
  Choice,
  EstimateResponse,
  LikertAnswers,
  QueryResponse,
  SessionParams,
} from "./types";

export class ConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ConflictError";
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (resp.status === 409) {
    const body = await resp.json().catch(() => ({ detail: "conflict" }));
    throw new ConflictError(String(body.detail ?? "conflict"));
  }
  if (!resp.ok) {
    const text = await resp.text();
    throw new Error(`HTTP ${resp.status}: ${text}`);
  }
  return resp.json() as Promise<T>;
}

/** Thin typed client over the session endpoints. */
export class SessionApi {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(params: SessionParams): Promise<string> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params),
    });
    const body = await asJson<{ session_id: string }>(resp);
    return body.session_id;
  }

  async getQuery(sessionId: string): Promise<QueryResponse> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}/query`)));
  }

  async answer(
    sessionId: string,
    choice: Choice,
    queryIndex: number,
  ): Promise<{ accepted: boolean; next_available: boolean }> {
    const resp = await fetch(this.url(`/sessions/${sessionId}/answer`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ choice, query_index: queryIndex }),
    });
    return asJson(resp);
  }

  async getEstimate(sessionId: string): Promise<EstimateResponse> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}/estimate`)));
  }

  async getCatalog(sessionId: string): Promise<CatalogEntry[]> {
    const body = await asJson<{ candidates: CatalogEntry[] }>(
      await fetch(this.url(`/sessions/${sessionId}/catalog`)),
    );
    return body.candidates;
  }

  async pinReference(sessionId: string, w: number[]): Promise<number[]> {
    const resp = await fetch(this.url(`/sessions/${sessionId}/reference`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ w }),
    });
    const body = await asJson<{ pinned: boolean; w: number[] }>(resp);
    return body.w;
  }

  async submitLikert(sessionId: string, answers: LikertAnswers): Promise<void> {
    const resp = await fetch(this.url(`/sessions/${sessionId}/likert`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(answers),
    });
    await asJson(resp);
  }
}
