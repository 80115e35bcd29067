import type { EventKind, InteractionEvent } from "./types.js";

type PostFn = (events: InteractionEvent[]) => Promise<unknown>;

/**
 * Buffers keyboard/mouse interaction events and flushes them every few
 * seconds and on save. A failed flush puts the batch back so no events are
 * dropped and timestamps stay in order.
 */
export class EventBatcher {
  private queue: InteractionEvent[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  private flushing = false;

  constructor(
    private readonly post: PostFn,
    private readonly user: string,
    private readonly intervalMs = 5000,
    private readonly now: () => number = () => Date.now(),
  ) {}

  start(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => void this.flush(), this.intervalMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get pending(): number {
    return this.queue.length;
  }

  record(noteId: string, kind: EventKind, detail = ""): void {
    this.queue.push({
      timestamp_ms: this.now(),
      user: this.user,
      note_id: noteId,
      kind,
      detail,
    });
  }

  async flush(): Promise<number> {
    if (this.flushing || this.queue.length === 0) return 0;
    this.flushing = true;
    const batch = this.queue.splice(0, this.queue.length);
    try {
      await this.post(batch);
      return batch.length;
    } catch {
      this.queue.unshift(...batch);
      return 0;
    } finally {
      this.flushing = false;
    }
  }
}
