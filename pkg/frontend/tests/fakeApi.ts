import {
  ApiClient,
  ApiError,
  HighlightSpan,
  LabelPost,
  LabelResponse,
  QueueResponse,
  RetrainResponse,
  StatsResponse,
  TicketPayload,
} from "../src/types.js";

const KEY_PHRASES = ["debt", "refactor", "hack", "workaround", "clean up"];

function keyphraseSpans(text: string): HighlightSpan[] {
  const enc = new TextEncoder();
  const lowered = text.toLowerCase();
  const spans: HighlightSpan[] = [];
  for (const phrase of KEY_PHRASES) {
    let from = 0;
    for (;;) {
      const i = lowered.indexOf(phrase, from);
      if (i < 0) break;
      const start = enc.encode(text.slice(0, i)).length;
      const end = start + enc.encode(text.slice(i, i + phrase.length)).length;
      spans.push({ phrase, start, end });
      from = i + 1;
    }
  }
  spans.sort((a, b) => a.start - b.start || a.end - b.end);
  return spans;
}

export function makeTicket(id: string, title: string, description = ""): TicketPayload {
  const freeText = `${title}\n${description}`.trimEnd() + (description ? "" : "\n");
  return {
    id,
    title,
    description,
    comments: [],
    author_email: `dev-${id}@example.org`,
    author_is_project_member: true,
    priority: 2,
    status: "New",
    issue_type: "Bug",
    opened_at: "2020-01-01T00:00:00Z",
    free_text: `${title}\n${description}\n`.replace(/\n+$/, "\n"),
    highlights: keyphraseSpans(`${title}\n${description}\n`.replace(/\n+$/, "\n")),
  };
}

/**
 * In-memory stand-in for the labeling service, implementing the documented
 * API contract: proportional queue with uniform fallback, last-write-wins
 * labels, 409 while retraining or with too few labels, monotone model
 * version, and stats derived from the label journal.
 */
export class FakeApi implements ApiClient {
  tickets = new Map<string, TicketPayload>();
  /** journal order preserved; last write per ticket wins for stats */
  journal: LabelPost[] = [];
  modelVersion = 0;
  retrainBusy = false;
  minLabelsForRetrain = 2;
  failNextPost: ApiError | null = null;

  constructor(tickets: TicketPayload[]) {
    for (const t of tickets) this.tickets.set(t.id, t);
  }

  private labeledIds(): Set<string> {
    return new Set(this.journal.map((p) => p.ticket_id));
  }

  async queue(limit: number): Promise<QueueResponse> {
    if (limit <= 0) throw new ApiError(400, "bad_limit", "limit must be positive");
    const labeled = this.labeledIds();
    const pool = Array.from(this.tickets.keys())
      .filter((id) => !labeled.has(id))
      .sort();
    // deterministic order that changes with the model version, mimicking
    // re-sampling after each retrain
    const rotated = pool
      .slice(this.modelVersion % Math.max(1, pool.length))
      .concat(pool.slice(0, this.modelVersion % Math.max(1, pool.length)));
    return {
      entries: rotated.slice(0, limit).map((id) => ({
        ticket_id: id,
        p: this.modelVersion === 0 ? 1.0 : 0.5,
        sampled_at: "2020-01-02T00:00:00Z",
      })),
      model_version: this.modelVersion,
      uniform_fallback: this.modelVersion === 0,
    };
  }

  async ticket(id: string): Promise<TicketPayload> {
    const t = this.tickets.get(id);
    if (!t) throw new ApiError(404, "unknown_ticket", `no such ticket: ${id}`);
    return t;
  }

  async postLabel(body: LabelPost): Promise<LabelResponse> {
    if (this.failNextPost) {
      const err = this.failNextPost;
      this.failNextPost = null;
      throw err;
    }
    if (!Number.isFinite(body.label) || body.label < 0 || body.label > 1) {
      throw new ApiError(400, "bad_label", `label out of range [0,1]: ${body.label}`);
    }
    if (!this.tickets.has(body.ticket_id)) {
      throw new ApiError(404, "unknown_ticket", `no such ticket: ${body.ticket_id}`);
    }
    this.journal.push({ ...body });
    return {
      ticket_id: body.ticket_id,
      label: body.label,
      rater: body.rater,
      labeled_at: "2020-01-02T00:00:00Z",
      rubric_path: body.rubric_path,
      notes: body.notes ?? null,
    };
  }

  async retrain(): Promise<RetrainResponse> {
    const n = this.labeledIds().size;
    if (n < this.minLabelsForRetrain) {
      throw new ApiError(409, "too_few_labels", `need at least ${this.minLabelsForRetrain} labels, have ${n}`);
    }
    if (this.retrainBusy) {
      throw new ApiError(409, "retrain_in_progress", "a retrain is already running");
    }
    this.modelVersion += 1;
    return { status: "done", model_version: this.modelVersion };
  }

  async stats(): Promise<StatsResponse> {
    const active = new Map<string, number>();
    for (const p of this.journal) active.set(p.ticket_id, p.label);
    const histogram = new Array<number>(10).fill(0);
    for (const label of active.values()) {
      histogram[Math.min(Math.floor(label * 10), 9)] += 1;
    }
    const cumulative: Array<[number, number]> = [];
    let sum = 0;
    let i = 0;
    const seen = new Set<string>();
    for (const p of this.journal) {
      if (seen.has(p.ticket_id)) continue;
      seen.add(p.ticket_id);
      i += 1;
      sum += p.label;
      cumulative.push([i, sum]);
    }
    return {
      n_labels: active.size,
      histogram,
      bin_edges: Array.from({ length: 11 }, (_, k) => k / 10),
      cumulative,
      model_version: this.modelVersion,
    };
  }
}
