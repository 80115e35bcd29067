import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EventBatcher } from "../src/events.js";
import type { InteractionEvent } from "../src/types.js";

describe("EventBatcher", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  function collector() {
    const batches: InteractionEvent[][] = [];
    const post = vi.fn(async (events: InteractionEvent[]) => {
      batches.push(events);
    });
    return { batches, post };
  }

  it("flushes on the interval", async () => {
    const { batches, post } = collector();
    let t = 0;
    const batcher = new EventBatcher(post, "tim", 5000, () => ++t);
    batcher.start();
    batcher.record("n1", "key", "a");
    batcher.record("n1", "mouse", "click");
    await vi.advanceTimersByTimeAsync(5000);
    expect(post).toHaveBeenCalledTimes(1);
    expect(batches[0]!.map((e) => e.kind)).toEqual(["key", "mouse"]);
    expect(batcher.pending).toBe(0);
    batcher.stop();
  });

  it("does not post empty batches", async () => {
    const { post } = collector();
    const batcher = new EventBatcher(post, "tim", 5000);
    batcher.start();
    await vi.advanceTimersByTimeAsync(15000);
    expect(post).not.toHaveBeenCalled();
    batcher.stop();
  });

  it("manual flush empties the queue immediately", async () => {
    const { batches, post } = collector();
    const batcher = new EventBatcher(post, "tim");
    batcher.record("n1", "save", "rev 1");
    const sent = await batcher.flush();
    expect(sent).toBe(1);
    expect(batches[0]![0]!.kind).toBe("save");
  });

  it("timestamps are non-decreasing across a batch", async () => {
    const { batches, post } = collector();
    let t = 100;
    const batcher = new EventBatcher(post, "tim", 5000, () => (t += 7));
    for (let i = 0; i < 10; i++) batcher.record("n1", "key");
    await batcher.flush();
    const stamps = batches[0]!.map((e) => e.timestamp_ms);
    expect([...stamps].sort((a, b) => a - b)).toEqual(stamps);
  });

  it("requeues the batch in order when the post fails", async () => {
    const calls: InteractionEvent[][] = [];
    let failures = 1;
    const post = async (events: InteractionEvent[]) => {
      if (failures-- > 0) throw new Error("offline");
      calls.push(events);
    };
    let t = 0;
    const batcher = new EventBatcher(post, "tim", 5000, () => ++t);
    batcher.record("n1", "key", "a");
    batcher.record("n1", "key", "b");
    expect(await batcher.flush()).toBe(0);
    expect(batcher.pending).toBe(2);
    batcher.record("n1", "key", "c");
    expect(await batcher.flush()).toBe(3);
    expect(calls[0]!.map((e) => e.detail)).toEqual(["a", "b", "c"]);
  });
});
