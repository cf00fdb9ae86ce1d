/**
 * Typed client for the curation service JSON API.
 * The fetch implementation is injectable so tests can script the server.
 */

export type Polarity = "positive" | "neutral" | "negative";
export type Decision = "accept" | "correct" | "skip";

export interface RationaleMatch {
  term: string;
  polarity: string;
  start: number; // codepoint index
  end: number;
  byte_offset: number;
}

export interface QueueItem {
  item_id: string;
  text: string;
  provisional_label: Polarity;
  rationale_matches: RationaleMatch[];
  status: string;
  final_label: Polarity | null;
  reviewer: string | null;
  decided_at: number | null;
  source: string;
}

export interface QueueStats {
  pending: number;
  accepted: number;
  corrected: number;
  skipped: number;
  total: number;
}

export interface DecisionRequest {
  item_id: string;
  decision: Decision;
  label?: Polarity | null;
  reviewer: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** Structural surface the review loop depends on; CurationApi implements
 * it over HTTP and tests implement it over an in-memory double. */
export interface CurationApiLike {
  nextItem(reviewer: string): Promise<QueueItem | null>;
  submitDecision(req: DecisionRequest): Promise<QueueItem>;
  stats(): Promise<QueueStats>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class CurationApi implements CurationApiLike {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { detail?: unknown };
        if (body && body.detail !== undefined) detail = String(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json();
  }

  /** Next pending item under a lease, or null when the queue is drained. */
  async nextItem(reviewer: string): Promise<QueueItem | null> {
    const data = await this.request(
      `/api/queue/next?reviewer=${encodeURIComponent(reviewer)}`,
    );
    return data as QueueItem | null;
  }

  async submitDecision(req: DecisionRequest): Promise<QueueItem> {
    const data = await this.request("/api/decision", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    return data as QueueItem;
  }

  async stats(): Promise<QueueStats> {
    return (await this.request("/api/stats")) as QueueStats;
  }
}
