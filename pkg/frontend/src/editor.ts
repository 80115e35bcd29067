import type { Assertion, Mention } from "./types.js";

// Every applied operation records enough to be undone exactly.
export type AppliedOp =
  | { kind: "add"; added: Mention; absorbed: Mention[] }
  | { kind: "delete"; removed: Mention }
  | { kind: "relabel"; before: Mention; after: Mention };

const byPosition = (a: Mention, b: Mention) =>
  a.start - b.start || a.end - b.end || a.element_id.localeCompare(b.element_id);

export function mentionKey(m: Mention): string {
  return `${m.element_id}:${m.start}:${m.end}`;
}

export function sameMention(a: Mention, b: Mention): boolean {
  return (
    a.element_id === b.element_id &&
    a.start === b.start &&
    a.end === b.end &&
    a.assertion === b.assertion
  );
}

/**
 * Annotation-only editing state for one note: the text never changes, the
 * mention list does. Undo and redo are unbounded command stacks; any new
 * edit clears the redo stack.
 */
export class EditorState {
  readonly noteId: string;
  readonly text: string;
  baseRevision: number;
  dirty = false;

  private mentionList: Mention[];
  private undoStack: AppliedOp[] = [];
  private redoStack: AppliedOp[] = [];

  constructor(noteId: string, text: string, mentions: readonly Mention[], baseRevision: number) {
    this.noteId = noteId;
    this.text = text;
    this.mentionList = [...mentions].sort(byPosition);
    this.baseRevision = baseRevision;
  }

  get mentions(): readonly Mention[] {
    return this.mentionList;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  get redoDepth(): number {
    return this.redoStack.length;
  }

  markSaved(revision: number): void {
    this.baseRevision = revision;
    this.dirty = false;
  }

  /**
   * Add a mention over [start, end). Same-element overlapping mentions are
   * auto-merged to the widest span, the same rule the tagger applies.
   */
  addMention(elementId: string, start: number, end: number, assertion: Assertion = "affirmed"): AppliedOp {
    if (start < 0 || end > this.text.length || start >= end) {
      throw new RangeError(`bad span [${start},${end}) for note of length ${this.text.length}`);
    }
    const candidate: Mention = {
      element_id: elementId,
      start,
      end,
      surface: this.text.slice(start, end),
      assertion,
      source: "human",
    };
    const absorbed = this.mentionList.filter(
      (m) => m.element_id === elementId && m.start < end && start < m.end,
    );
    let widest = candidate;
    for (const m of absorbed) {
      const wider =
        m.end - m.start > widest.end - widest.start ||
        (m.end - m.start === widest.end - widest.start && m.start < widest.start);
      if (wider) widest = m;
    }
    return this.push({ kind: "add", added: widest, absorbed });
  }

  deleteMention(target: Mention): AppliedOp {
    const found = this.mentionList.find((m) => sameMention(m, target));
    if (!found) throw new Error(`no such mention: ${mentionKey(target)}`);
    return this.push({ kind: "delete", removed: found });
  }

  /** Replace a mention's element id and/or assertion; the span stays put. */
  relabelMention(target: Mention, changes: { element_id?: string; assertion?: Assertion }): AppliedOp {
    const found = this.mentionList.find((m) => sameMention(m, target));
    if (!found) throw new Error(`no such mention: ${mentionKey(target)}`);
    const after: Mention = { ...found, ...changes, source: "human" };
    return this.push({ kind: "relabel", before: found, after });
  }

  undo(): AppliedOp | null {
    const op = this.undoStack.pop();
    if (!op) return null;
    this.invert(op);
    this.redoStack.push(op);
    return op;
  }

  redo(): AppliedOp | null {
    const op = this.redoStack.pop();
    if (!op) return null;
    this.apply(op);
    this.undoStack.push(op);
    return op;
  }

  private push(op: AppliedOp): AppliedOp {
    this.apply(op);
    this.undoStack.push(op);
    this.redoStack.length = 0;
    this.dirty = true;
    return op;
  }

  private apply(op: AppliedOp): void {
    if (op.kind === "add") {
      this.remove(op.absorbed);
      this.insert(op.added);
    } else if (op.kind === "delete") {
      this.remove([op.removed]);
    } else {
      this.remove([op.before]);
      this.insert(op.after);
    }
  }

  private invert(op: AppliedOp): void {
    if (op.kind === "add") {
      this.remove([op.added]);
      for (const m of op.absorbed) this.insert(m);
    } else if (op.kind === "delete") {
      this.insert(op.removed);
    } else {
      this.remove([op.after]);
      this.insert(op.before);
    }
  }

  private insert(m: Mention): void {
    this.mentionList.push(m);
    this.mentionList.sort(byPosition);
  }

  private remove(targets: readonly Mention[]): void {
    for (const t of targets) {
      const i = this.mentionList.findIndex((m) => sameMention(m, t));
      if (i >= 0) this.mentionList.splice(i, 1);
    }
  }
}
