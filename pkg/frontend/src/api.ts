import {
  ApiClient,
  ApiError,
  LabelPost,
  LabelResponse,
  QueueResponse,
  RetrainResponse,
  StatsResponse,
  TicketPayload,
} from "./types.js";

async function parseError(res: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${res.status} ${res.statusText}`;
  try {
    const body = (await res.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(res.status, code, message);
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  if (!res.ok) throw await parseError(res);
  return (await res.json()) as T;
}

async function postJson<T>(url: string, body: unknown): Promise<T> {
  const res = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) throw await parseError(res);
  return (await res.json()) as T;
}

/** fetch-backed client for the labeling service. */
export class HttpApiClient implements ApiClient {
  constructor(private readonly base: string = "") {}

  queue(limit: number): Promise<QueueResponse> {
    return getJson(`${this.base}/api/queue?limit=${limit}`);
  }

  ticket(id: string): Promise<TicketPayload> {
    return getJson(`${this.base}/api/tickets/${encodeURIComponent(id)}`);
  }

  postLabel(body: LabelPost): Promise<LabelResponse> {
    return postJson(`${this.base}/api/labels`, body);
  }

  retrain(): Promise<RetrainResponse> {
    return postJson(`${this.base}/api/retrain`, {});
  }

  stats(): Promise<StatsResponse> {
    return getJson(`${this.base}/api/stats`);
  }
}
