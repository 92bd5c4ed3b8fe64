/** Payload types for the labeling-service JSON API. */

export interface QueueEntry {
  ticket_id: string;
  p: number;
  sampled_at: string;
}

export interface QueueResponse {
  entries: QueueEntry[];
  model_version: number;
  uniform_fallback: boolean;
}

export interface TicketComment {
  author: string;
  posted_at: string;
  text: string;
}

/** Byte offsets into the UTF-8 encoding of `free_text`. */
export interface HighlightSpan {
  phrase: string;
  start: number;
  end: number;
}

export interface TicketPayload {
  id: string;
  title: string;
  description: string;
  comments: TicketComment[];
  author_email: string;
  author_is_project_member: boolean;
  priority: number;
  status: string;
  issue_type: string;
  opened_at: string;
  free_text: string;
  highlights: HighlightSpan[];
}

export type RubricAnswer = "yes" | "no" | "unsure";

export interface RubricPath {
  artifact_evidence: RubricAnswer | null;
  improvement_or_defect: RubricAnswer | null;
  design_limitation: RubricAnswer | null;
  side_effects_or_extra_work: RubricAnswer | null;
}

export interface LabelPost {
  ticket_id: string;
  label: number;
  rater: string;
  rubric_path: RubricPath;
  notes?: string;
}

export interface LabelResponse {
  ticket_id: string;
  label: number;
  rater: string;
  labeled_at: string;
  rubric_path: RubricPath;
  notes: string | null;
}

export interface RetrainResponse {
  status: "started" | "done";
  model_version: number;
}

export interface StatsResponse {
  n_labels: number;
  histogram: number[];
  bin_edges: number[];
  /** [n_labeled, cumulative label sum] pairs in labeling order. */
  cumulative: Array<[number, number]>;
  model_version: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

/** Error raised for non-2xx API responses; carries the service error body. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The subset of the service the UI talks to. */
export interface ApiClient {
  queue(limit: number): Promise<QueueResponse>;
  ticket(id: string): Promise<TicketPayload>;
  postLabel(body: LabelPost): Promise<LabelResponse>;
  retrain(): Promise<RetrainResponse>;
  stats(): Promise<StatsResponse>;
}
