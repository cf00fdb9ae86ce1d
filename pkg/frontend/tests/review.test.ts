import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api";
import type { DecisionRequest, QueueItem } from "../src/api";
import { ReviewController } from "../src/review";
import type { ReviewState } from "../src/review";
import { FakeServer } from "./fake_server";

async function started(server: FakeServer, reviewer = "dara") {
  const controller = new ReviewController(server.api(), reviewer);
  await controller.start();
  return controller;
}

describe("ReviewController", () => {
  it("loads the first pending item and the live counters", async () => {
    const server = FakeServer.withItems(3);
    const c = await started(server);
    expect(c.state.phase).toBe("reviewing");
    expect(c.state.item?.item_id).toBe("i0000");
    expect(c.state.stats).toEqual({ pending: 3, accepted: 0, corrected: 0, skipped: 0, total: 3 });
  });

  it("posts exactly one decision even when triggered twice", async () => {
    const server = FakeServer.withItems(2);
    const c = await started(server);
    const [first, second] = await Promise.all([c.decide("accept"), c.decide("accept")]);
    expect(first).toBe(true);
    expect(second).toBe(false); // second press hit the in-flight guard
    expect(server.postCount).toBe(1);
    expect(server.log).toHaveLength(1);
  });

  it("decrements the queue counter optimistically, then confirms", async () => {
    const server = FakeServer.withItems(3);
    const c = await started(server);
    const seen: ReviewState[] = [];
    c.subscribe((s) => seen.push(s));

    await c.decide("accept");
    const optimistic = seen.find((s) => s.phase === "loading");
    expect(optimistic?.stats?.pending).toBe(2); // before the server answered
    expect(c.state.stats?.pending).toBe(2); // confirmed
    expect(c.state.stats?.accepted).toBe(1);
    expect(c.state.item?.item_id).toBe("i0001");
    expect(c.state.decidedThisSession).toBe(1);
  });

  it("counts a correction to the provisional label as an accept", async () => {
    const server = FakeServer.withItems(1); // i0000 is provisional positive
    const c = await started(server);
    await c.decide("correct", "positive");
    expect(c.state.stats?.accepted).toBe(1);
    expect(c.state.stats?.corrected).toBe(0);
    expect(server.items.get("i0000")?.status).toBe("accepted");
  });

  it("rolls back and resyncs when the item was decided elsewhere", async () => {
    const server = FakeServer.withItems(3);
    const c = await started(server);
    server.decideDirect("i0000", "accept"); // another reviewer got there first

    const ok = await c.decide("skip");
    expect(ok).toBe(false);
    expect(c.state.message).toContain("conflict");
    expect(c.state.decidedThisSession).toBe(0); // optimistic count undone
    expect(c.state.stats?.pending).toBe(2); // the other reviewer's decision
    expect(c.state.item?.item_id).toBe("i0001"); // moved on after resync
  });

  it("restores the card after a transport failure and allows a retry", async () => {
    const server = FakeServer.withItems(2);
    const api = server.api();
    let failNext = true;
    const flaky = {
      ...api,
      submitDecision: async (req: DecisionRequest): Promise<QueueItem> => {
        if (failNext) {
          failNext = false;
          throw new TypeError("network down");
        }
        return api.submitDecision(req);
      },
    };
    const c = new ReviewController(flaky, "dara");
    await c.start();

    expect(await c.decide("accept")).toBe(false);
    expect(c.state.phase).toBe("reviewing");
    expect(c.state.item?.item_id).toBe("i0000"); // card came back
    expect(c.state.stats?.pending).toBe(2); // counters rolled back
    expect(c.state.message).toContain("network down");
    expect(server.postCount).toBe(0);

    expect(await c.decide("accept")).toBe(true);
    expect(server.postCount).toBe(1);
    expect(c.state.item?.item_id).toBe("i0001");
  });

  it("surfaces a 404 as a conflict-style resync, not a dead end", async () => {
    const server = FakeServer.withItems(1);
    const api = server.api();
    const gone = {
      ...api,
      submitDecision: async (): Promise<QueueItem> => {
        throw new ApiError(404, "unknown item i0000");
      },
    };
    const c = new ReviewController(gone, "dara");
    await c.start();
    await c.decide("accept");
    expect(c.state.message).toContain("conflict");
    expect(c.state.phase).toBe("reviewing"); // resynced back onto the queue
  });

  it("reaches the completion screen when the queue drains", async () => {
    const server = FakeServer.withItems(2);
    const c = await started(server);
    await c.decide("accept");
    await c.decide("correct", "negative");
    expect(c.state.phase).toBe("done");
    expect(c.state.item).toBeNull();
    expect(c.state.stats?.pending).toBe(0);
    expect(c.state.decidedThisSession).toBe(2);
  });

  it("rebuilds the same view from the server after a reload", async () => {
    const server = FakeServer.withItems(5);
    const c = await started(server);
    await c.decide("accept");
    await c.decide("correct", "negative");
    await c.decide("skip");

    // restart both sides: replayed service state, fresh controller
    const replayed = server.replayedClone();
    expect(Object.fromEntries(replayed.items)).toEqual(Object.fromEntries(server.items));

    const fresh = await started(replayed, "dara");
    expect(fresh.state.stats).toEqual(c.state.stats);
    expect(fresh.state.item?.item_id).toBe(c.state.item?.item_id);
    expect(fresh.state.decidedThisSession).toBe(0); // session counter is local
  });
});
