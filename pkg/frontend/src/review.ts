/**
 * Review-loop state machine, DOM-free so tests can drive it directly.
 *
 * Every view is derived from the server (/api/stats + /api/queue/next);
 * nothing is persisted client-side, so a page reload reconstructs the
 * exact same state. Decisions advance optimistically: the counters move
 * and the card clears immediately, and a failed POST rolls that back.
 */
import { ApiError } from "./api";
import type {
  CurationApiLike,
  Decision,
  Polarity,
  QueueItem,
  QueueStats,
} from "./api";

export type Phase = "loading" | "reviewing" | "done" | "error";

export interface ReviewState {
  phase: Phase;
  item: QueueItem | null;
  stats: QueueStats | null;
  decidedThisSession: number;
  message: string | null;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}

/** Counter move for one decision, mirroring the server's rule that
 * correcting to the provisional label counts as an accept. */
function bumpStats(
  stats: QueueStats,
  decision: Decision,
  item: QueueItem,
  label?: Polarity,
): QueueStats {
  const out = { ...stats, pending: Math.max(0, stats.pending - 1) };
  if (decision === "skip") out.skipped += 1;
  else if (decision === "accept" || label === item.provisional_label) out.accepted += 1;
  else out.corrected += 1;
  return out;
}

export class ReviewController {
  state: ReviewState = {
    phase: "loading",
    item: null,
    stats: null,
    decidedThisSession: 0,
    message: null,
  };

  private listeners = new Set<(s: ReviewState) => void>();
  private busy = false;

  constructor(
    private api: CurationApiLike,
    readonly reviewer: string,
  ) {}

  subscribe(fn: (s: ReviewState) => void): () => void {
    this.listeners.add(fn);
    fn(this.state);
    return () => this.listeners.delete(fn);
  }

  private set(patch: Partial<ReviewState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  async start(): Promise<void> {
    this.set({ phase: "loading", message: null });
    await this.resync();
  }

  private async resync(): Promise<void> {
    try {
      const [stats, item] = await Promise.all([
        this.api.stats(),
        this.api.nextItem(this.reviewer),
      ]);
      this.set({ stats, item, phase: item ? "reviewing" : "done" });
    } catch (err) {
      this.set({ phase: "error", message: describeError(err) });
    }
  }

  /**
   * Submit a decision for the current card. Returns false when there is
   * nothing to decide or a decision is already in flight, so a held-down
   * key can never double-post.
   */
  async decide(decision: Decision, label?: Polarity): Promise<boolean> {
    if (this.busy || this.state.phase !== "reviewing" || !this.state.item) return false;
    this.busy = true;
    const item = this.state.item;
    const before = this.state.stats;
    this.set({
      phase: "loading",
      item: null,
      stats: before ? bumpStats(before, decision, item, label) : before,
      decidedThisSession: this.state.decidedThisSession + 1,
      message: null,
    });
    try {
      await this.api.submitDecision({
        item_id: item.item_id,
        decision,
        label: label ?? null,
        reviewer: this.reviewer,
      });
      const [stats, next] = await Promise.all([
        this.api.stats(),
        this.api.nextItem(this.reviewer),
      ]);
      this.set({ stats, item: next, phase: next ? "reviewing" : "done" });
      return true;
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 404)) {
        // decided elsewhere: drop the optimistic move and resync
        this.set({
          decidedThisSession: this.state.decidedThisSession - 1,
          message: `conflict: ${describeError(err)}`,
        });
        await this.resync();
      } else {
        // transport or validation failure: put the card back
        this.set({
          phase: "reviewing",
          item,
          stats: before,
          decidedThisSession: this.state.decidedThisSession - 1,
          message: describeError(err),
        });
      }
      return false;
    } finally {
      this.busy = false;
    }
  }
}
