import { ApiClient, ApiError, LabelPost } from "./types.js";

export interface SubmitResult {
  delivered: boolean;
  /** Posts still waiting for redelivery after this attempt. */
  pending: number;
}

/**
 * Client-side retry queue for label posts.
 *
 * A 409 (service busy retraining) or a network failure parks the post here;
 * `flush()` redelivers in order. Validation failures (other 4xx) are not
 * retried — they would fail identically — and propagate to the caller.
 */
export class LabelRetryQueue {
  private queue: LabelPost[] = [];

  constructor(private readonly api: ApiClient) {}

  get pending(): number {
    return this.queue.length;
  }

  get pendingPosts(): readonly LabelPost[] {
    return this.queue;
  }

  private shouldRetry(err: unknown): boolean {
    if (err instanceof ApiError) return err.status === 409 || err.status >= 500;
    return true; // network-level failure
  }

  /** Submit one label, parking it for retry on transient failure. */
  async submit(post: LabelPost): Promise<SubmitResult> {
    try {
      await this.api.postLabel(post);
      return { delivered: true, pending: this.queue.length };
    } catch (err) {
      if (this.shouldRetry(err)) {
        this.queue.push(post);
        return { delivered: false, pending: this.queue.length };
      }
      throw err;
    }
  }

  /** Redeliver parked posts in order; stops at the first transient failure. */
  async flush(): Promise<number> {
    while (this.queue.length > 0) {
      const post = this.queue[0];
      try {
        await this.api.postLabel(post);
        this.queue.shift();
      } catch (err) {
        if (this.shouldRetry(err)) break;
        this.queue.shift(); // permanently rejected: drop and surface
        throw err;
      }
    }
    return this.queue.length;
  }
}
