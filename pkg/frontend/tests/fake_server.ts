/**
 * In-memory double of the curation service for controller and UI tests:
 * same queue order, conflict, and correct-to-same-label semantics as the
 * real service, plus a decision log so a "service restart" can be
 * simulated by replaying it over a pristine snapshot.
 */
import { ApiError } from "../src/api";
import type {
  CurationApiLike,
  DecisionRequest,
  Polarity,
  QueueItem,
  QueueStats,
} from "../src/api";

interface LogEntry {
  item_id: string;
  decision: string;
  label: Polarity | null;
  reviewer: string;
}

const LABELS: Polarity[] = ["positive", "neutral", "negative"];

export class FakeServer {
  items = new Map<string, QueueItem>();
  order: string[] = [];
  log: LogEntry[] = [];
  postCount = 0;

  static withItems(n: number): FakeServer {
    const server = new FakeServer();
    for (let i = 0; i < n; i++) {
      const id = `i${String(i).padStart(4, "0")}`;
      server.add({
        item_id: id,
        text: `អត្ថបទល្អទី ${i}`,
        provisional_label: LABELS[i % LABELS.length],
        rationale_matches: [
          { term: "ល្អ", polarity: "positive", start: 6, end: 9, byte_offset: 18 },
        ],
        status: "pending",
        final_label: null,
        reviewer: null,
        decided_at: null,
        source: "custom",
      });
    }
    return server;
  }

  add(item: QueueItem): void {
    this.items.set(item.item_id, { ...item });
    this.order.push(item.item_id);
  }

  private applyDecision(req: DecisionRequest): QueueItem {
    const item = this.items.get(req.item_id);
    if (!item) throw new ApiError(404, `unknown item ${req.item_id}`);
    if (item.status !== "pending") {
      throw new ApiError(409, `item ${req.item_id} is already ${item.status}`);
    }
    let decision = req.decision as string;
    let label = req.label ?? null;
    if (decision === "correct" && label === null) {
      throw new ApiError(422, "correct needs a label");
    }
    if (decision === "correct" && label === item.provisional_label) {
      decision = "accept"; // mirror the server-side normalization
    }
    if (decision === "accept") {
      item.status = "accepted";
      item.final_label = item.provisional_label;
    } else if (decision === "correct") {
      item.status = "corrected";
      item.final_label = label;
    } else if (decision === "skip") {
      item.status = "skipped";
      item.final_label = null;
    } else {
      throw new ApiError(422, `unknown decision ${decision}`);
    }
    item.reviewer = req.reviewer;
    item.decided_at = this.log.length + 1;
    return item;
  }

  /** Decide an item outside the client under test, as another reviewer would. */
  decideDirect(itemId: string, decision: DecisionRequest["decision"], reviewer = "someone-else"): void {
    const req: DecisionRequest = { item_id: itemId, decision, label: null, reviewer };
    this.applyDecision(req);
    this.log.push({ item_id: itemId, decision, label: null, reviewer });
  }

  /** Fresh server state rebuilt from the pristine queue plus the log,
   * as the real service does on restart. */
  replayedClone(): FakeServer {
    const clone = new FakeServer();
    for (const id of this.order) {
      const item = this.items.get(id)!;
      clone.add({
        ...item,
        status: "pending",
        final_label: null,
        reviewer: null,
        decided_at: null,
      });
    }
    for (const entry of this.log) {
      clone.applyDecision({
        item_id: entry.item_id,
        decision: entry.decision as DecisionRequest["decision"],
        label: entry.label,
        reviewer: entry.reviewer,
      });
      clone.log.push({ ...entry });
    }
    return clone;
  }

  api(): CurationApiLike {
    return {
      nextItem: async (_reviewer: string) => {
        for (const id of this.order) {
          const item = this.items.get(id)!;
          if (item.status === "pending") return { ...item };
        }
        return null;
      },
      submitDecision: async (req: DecisionRequest) => {
        this.postCount += 1;
        const item = this.applyDecision(req);
        this.log.push({
          item_id: req.item_id,
          decision: req.decision,
          label: req.label ?? null,
          reviewer: req.reviewer,
        });
        return { ...item };
      },
      stats: async () => {
        const out: QueueStats = { pending: 0, accepted: 0, corrected: 0, skipped: 0, total: 0 };
        for (const item of this.items.values()) {
          out.total += 1;
          out[item.status as "pending" | "accepted" | "corrected" | "skipped"] += 1;
        }
        return out;
      },
    };
  }
}
