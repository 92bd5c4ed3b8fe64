import { LabelRetryQueue } from "./retryQueue.js";
import {
  ApiClient,
  ApiError,
  LabelPost,
  QueueResponse,
  RetrainResponse,
  StatsResponse,
  TicketPayload,
} from "./types.js";
import { RubricWalk } from "./rubric.js";

export type RetrainState = "idle" | "running" | "done" | "blocked";

/**
 * One rater's labeling session: holds the current queue, the ticket being
 * labeled, its rubric walk, and the latest stats. All state changes go
 * through the documented API; nothing is derived client-side that the
 * service does not report.
 */
export class LabelingSession {
  readonly retryQueue: LabelRetryQueue;
  queue: QueueResponse = { entries: [], model_version: 0, uniform_fallback: true };
  ticket: TicketPayload | null = null;
  walk = new RubricWalk();
  stats: StatsResponse | null = null;
  retrainState: RetrainState = "idle";
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    public rater: string = "",
    private readonly queueLimit: number = 10,
  ) {
    this.retryQueue = new LabelRetryQueue(api);
  }

  /** Fetch a fresh queue and load its first ticket. */
  async refreshQueue(): Promise<void> {
    this.queue = await this.api.queue(this.queueLimit);
    await this.loadCurrent();
  }

  private async loadCurrent(): Promise<void> {
    const next = this.queue.entries[0];
    if (!next) {
      this.ticket = null;
      return;
    }
    this.ticket = await this.api.ticket(next.ticket_id);
    this.walk.reset();
  }

  /** Advance past the current queue entry, refetching when exhausted. */
  private async advance(): Promise<void> {
    this.queue.entries.shift();
    if (this.queue.entries.length === 0) {
      await this.refreshQueue();
    } else {
      await this.loadCurrent();
    }
  }

  /**
   * Submit the current walk's confidence as the label and move on. On a
   * transient failure the post is parked for retry and the session still
   * advances (optimistic UI); on a validation error the form is preserved.
   */
  async submitLabel(notes?: string): Promise<boolean> {
    if (this.ticket === null) return false;
    const post: LabelPost = {
      ticket_id: this.ticket.id,
      label: this.walk.confidence,
      rater: this.rater,
      rubric_path: this.walk.toRubricPath(),
      ...(notes ? { notes } : {}),
    };
    let delivered: boolean;
    try {
      const result = await this.retryQueue.submit(post);
      delivered = result.delivered;
      this.lastError = delivered ? null : "label parked for retry";
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return false; // form preserved
    }
    await this.advance();
    await this.refreshStats();
    return delivered;
  }

  async refreshStats(): Promise<void> {
    this.stats = await this.api.stats();
  }

  /** Trigger a retrain; afterwards redeliver parked labels and reload. */
  async retrain(): Promise<RetrainResponse | null> {
    this.retrainState = "running";
    let response: RetrainResponse;
    try {
      response = await this.api.retrain();
    } catch (err) {
      this.retrainState = "blocked";
      this.lastError =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      return null;
    }
    this.retrainState = response.status === "done" ? "done" : "running";
    await this.retryQueue.flush();
    await this.refreshQueue();
    await this.refreshStats();
    return response;
  }
}
