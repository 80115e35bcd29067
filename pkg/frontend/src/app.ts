import { saveAndAdvance } from "./advance.js";
import { ApiClient } from "./api.js";
import { EditorState, mentionKey } from "./editor.js";
import { EventBatcher } from "./events.js";
import {
  HighlightState,
  emptyHighlight,
  highlightForCategory,
  highlightForElement,
  highlightForMention,
} from "./highlight.js";
import { ReminderPopup, groupByCategory } from "./popup.js";
import type { LexiconView, Mention, NoteDetail } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  private readonly api: ApiClient;
  private readonly batcher: EventBatcher;
  private lexicon: LexiconView | null = null;
  private state: EditorState | null = null;
  private highlight: HighlightState = emptyHighlight();
  private popup: ReminderPopup | null = null;
  private statusLine = "";

  constructor(private readonly root: HTMLElement, private readonly user: string) {
    this.api = new ApiClient({ user });
    this.batcher = new EventBatcher((events) => this.api.postEvents(events), user);
  }

  async start(): Promise<void> {
    this.lexicon = await this.api.getLexicon();
    this.batcher.start();
    document.addEventListener("keydown", () => this.recordEvent("key", "press"));
    document.addEventListener("mousedown", () => this.recordEvent("mouse", "click"));
    await this.openOverview();
  }

  private recordEvent(kind: "key" | "mouse", detail: string): void {
    const noteId = this.state ? this.state.noteId : "";
    if (noteId) this.batcher.record(noteId, kind, detail);
  }

  // --- overview -------------------------------------------------------

  async openOverview(query = ""): Promise<void> {
    this.state = null;
    this.popup = null;
    const list = await this.api.listNotes(query || undefined);
    this.root.replaceChildren();

    const header = el("div", "overview-header");
    header.append(
      el(
        "span",
        "counts",
        `Complete = ${list.complete_count}, Incomplete = ${list.incomplete_count}, ` +
          `Total = ${list.total}`,
      ),
    );
    const search = el("input", "search");
    search.placeholder = "Search file name";
    search.value = query;
    search.addEventListener("change", () => void this.openOverview(search.value));
    header.append(search);
    this.root.append(header);

    const table = el("table", "overview");
    const head = el("tr");
    for (const col of ["STATUS", "FILE NAME", "ANNOTATION COUNT", "LAST REVIEWED BY", "LAST UPDATED", ""]) {
      head.append(el("th", "", col));
    }
    table.append(head);
    for (const status of list.notes) {
      const row = el("tr", status.state);
      row.append(el("td", "", status.state === "complete" ? "✓" : "…"));
      row.append(el("td", "", status.file_name));
      row.append(el("td", "", String(status.annotation_count)));
      row.append(el("td", "", status.last_reviewed_by || "—"));
      row.append(el("td", "", status.last_updated));
      const actions = el("td");
      if (status.state === "complete") {
        const recheck = el("button", "recheck", "Recheck");
        recheck.addEventListener("click", async () => {
          await this.api.recheck(status.note_id);
          await this.openOverview(search.value);
        });
        actions.append(recheck);
      } else {
        const review = el("button", "review", "Review");
        review.addEventListener("click", () => void this.openNote(status.note_id));
        actions.append(review);
      }
      row.append(actions);
      table.append(row);
    }
    this.root.append(table);
  }

  // --- editor ---------------------------------------------------------

  async openNote(noteId: string): Promise<void> {
    const detail = await this.api.getNote(noteId);
    this.state = new EditorState(noteId, detail.text, detail.mentions, detail.status.revision);
    this.highlight = emptyHighlight();
    this.popup = null;
    this.statusLine = "";
    this.renderEditor(detail);
  }

  private renderEditor(detail: NoteDetail): void {
    if (!this.state || !this.lexicon) return;
    this.root.replaceChildren();

    const layout = el("div", "editor-layout");
    layout.append(this.renderBrowser(), this.renderNoteText());
    this.root.append(layout, this.renderButtons(detail));
    if (this.popup) this.root.append(this.renderPopup());
  }

  private counts(): Map<string, number> {
    const counts = new Map<string, number>();
    for (const m of this.state?.mentions ?? []) {
      counts.set(m.element_id, (counts.get(m.element_id) ?? 0) + 1);
    }
    return counts;
  }

  private renderBrowser(): HTMLElement {
    const browser = el("div", "browser");
    if (!this.lexicon) return browser;
    const counts = this.counts();
    for (const group of groupByCategory(this.lexicon.elements, this.lexicon.categories)) {
      const title = el("div", "category", group.category);
      title.addEventListener("click", () => {
        this.highlight = highlightForCategory(
          this.state?.mentions ?? [],
          this.lexicon?.elements ?? [],
          group.category,
        );
        this.refresh();
      });
      browser.append(title);
      for (const element of group.elements) {
        const bold = this.highlight.boldElementIds.has(element.element_id);
        const row = el("div", bold ? "element bold" : "element");
        const n = counts.get(element.element_id) ?? 0;
        row.textContent = n ? `${element.name} (${n})` : element.name;
        row.addEventListener("click", () => {
          this.highlight = highlightForElement(this.state?.mentions ?? [], element.element_id);
          this.refresh();
        });
        browser.append(row);
      }
    }
    return browser;
  }

  private renderNoteText(): HTMLElement {
    const editor = el("div", "note-text");
    const state = this.state;
    if (!state) return editor;

    const cuts = new Set<number>([0, state.text.length]);
    for (const m of state.mentions) {
      cuts.add(m.start);
      cuts.add(m.end);
    }
    const bounds = [...cuts].sort((a, b) => a - b);
    for (let i = 0; i + 1 < bounds.length; i++) {
      const [a, b] = [bounds[i]!, bounds[i + 1]!];
      const covering = state.mentions.filter((m) => m.start <= a && b <= m.end);
      const segment = state.text.slice(a, b);
      if (!covering.length) {
        editor.append(document.createTextNode(segment));
        continue;
      }
      const primary = covering[0]!;
      const classes = ["mention"];
      if (covering.some((m) => m.assertion === "negated")) classes.push("negated");
      if (covering.some((m) => this.highlight.mentionKeys.has(mentionKey(m)))) {
        classes.push("lit");
      }
      const span = el("span", classes.join(" "), segment);
      span.title = covering.map((m) => `${m.element_id} [${m.assertion}]`).join(", ");
      span.addEventListener("click", () => {
        this.highlight = highlightForMention(primary);
        this.refresh();
      });
      span.addEventListener("contextmenu", (ev) => {
        ev.preventDefault();
        this.openPopupFor(primary);
      });
      editor.append(span);
    }
    editor.addEventListener("contextmenu", (ev) => {
      const selection = this.currentSelection(editor);
      if (selection) {
        ev.preventDefault();
        this.openPopupFor(null, selection);
      }
    });
    return editor;
  }

  /** Character offsets of the current browser selection inside the note. */
  private currentSelection(editor: HTMLElement): { start: number; end: number } | null {
    const sel = window.getSelection();
    if (!sel || sel.isCollapsed || !editor.contains(sel.anchorNode)) return null;
    const range = sel.getRangeAt(0);
    const prefix = range.cloneRange();
    prefix.selectNodeContents(editor);
    prefix.setEnd(range.startContainer, range.startOffset);
    const start = prefix.toString().length;
    const text = range.toString();
    if (!text.length) return null;
    return { start, end: start + text.length };
  }

  private openPopupFor(target: Mention | null, selection?: { start: number; end: number }): void {
    if (!this.lexicon || !this.state) return;
    const span = target ? { start: target.start, end: target.end } : selection!;
    this.popup = new ReminderPopup(this.lexicon, span, target);
    this.refresh();
  }

  private renderPopup(): HTMLElement {
    const popup = this.popup!;
    const box = el("div", "popup");
    const input = el("input", "popup-filter");
    input.placeholder = "Type to filter data elements";
    input.value = popup.typedPrefix;
    input.addEventListener("input", () => {
      popup.type(input.value);
      this.refresh();
    });
    input.addEventListener("keydown", (ev) => {
      if (ev.key === "ArrowDown") {
        popup.move(1);
        ev.preventDefault();
        this.refresh();
      } else if (ev.key === "ArrowUp") {
        popup.move(-1);
        ev.preventDefault();
        this.refresh();
      } else if (ev.key === "Enter") {
        ev.preventDefault();
        this.applyIntent();
      } else if (ev.key === "Escape") {
        this.popup = null;
        this.refresh();
      }
    });
    box.append(input);

    if (popup.target) {
      const tools = el("div", "popup-tools");
      const del = el("button", "", "Delete");
      del.addEventListener("click", () => {
        this.state?.deleteMention(popup.target!);
        this.popup = null;
        this.refresh();
      });
      const toggle = el("button", "", popup.target.assertion === "negated" ? "Mark affirmed" : "Mark negated");
      toggle.addEventListener("click", () => {
        this.state?.relabelMention(popup.target!, {
          assertion: popup.target!.assertion === "negated" ? "affirmed" : "negated",
        });
        this.popup = null;
        this.refresh();
      });
      tools.append(del, toggle);
      box.append(tools);
    }

    for (const group of popup.groups) {
      box.append(el("div", "popup-category", group.category));
      for (const element of group.elements) {
        const isCurrent = popup.highlighted?.element_id === element.element_id;
        const row = el("div", isCurrent ? "popup-item current" : "popup-item", element.name);
        row.addEventListener("click", () => {
          this.applyIntent(popup.choose(element) ?? undefined);
        });
        box.append(row);
      }
    }
    queueMicrotask(() => input.focus());
    return box;
  }

  private applyIntent(intent = this.popup?.choose() ?? undefined): void {
    if (!intent || !this.state) return;
    try {
      if (intent.kind === "add") {
        this.state.addMention(intent.element_id, intent.start, intent.end);
      } else {
        this.state.relabelMention(intent.target, { element_id: intent.element_id });
      }
      this.statusLine = "";
    } catch (err) {
      this.statusLine = err instanceof Error ? err.message : String(err);
    }
    this.popup = null;
    this.refresh();
  }

  private renderButtons(detail: NoteDetail): HTMLElement {
    const bar = el("div", "buttons");
    const state = this.state!;

    const undo = el("button", "", "Undo");
    undo.disabled = state.undoDepth === 0;
    undo.addEventListener("click", () => {
      state.undo();
      this.refresh();
    });
    const redo = el("button", "", "Redo");
    redo.disabled = state.redoDepth === 0;
    redo.addEventListener("click", () => {
      state.redo();
      this.refresh();
    });

    const save = el("button", "", "Save progress");
    save.addEventListener("click", () => void this.save(false));
    const complete = el("button", "primary", "Save complete & next");
    complete.addEventListener("click", () => void this.save(true));

    const overview = el("button", "", "Overview");
    overview.addEventListener("click", () => void this.openOverview());

    bar.append(undo, redo, save, complete, overview);
    bar.append(
      el(
        "span",
        "note-info",
        `${detail.note_id}.txt · rev ${state.baseRevision}` +
          (state.dirty ? " · unsaved changes" : ""),
      ),
    );
    if (this.statusLine) bar.append(el("span", "status-line", this.statusLine));
    return bar;
  }

  private async save(markComplete: boolean): Promise<void> {
    if (!this.state) return;
    this.batcher.record(this.state.noteId, markComplete ? "complete" : "save");
    await this.batcher.flush();
    const outcome = await saveAndAdvance(this.api, this.state, markComplete, {
      openNote: (id) => void this.openNote(id),
      openOverview: () => void this.openOverview(),
    });
    if (outcome.kind === "conflict") {
      const reload = window.confirm(
        "This note changed on the server. Reload it? Your unsaved edits stay if you cancel.",
      );
      if (reload) await this.openNote(this.state.noteId);
      else {
        this.statusLine = "save conflict: reload required before saving";
        this.refresh();
      }
      return;
    }
    if (outcome.kind === "error") {
      this.statusLine = `save failed: ${outcome.detail}`;
      this.refresh();
      return;
    }
    if (!markComplete) {
      this.statusLine = "saved";
      this.refresh();
    }
  }

  private refresh(): void {
    if (!this.state) return;
    const detail: NoteDetail = {
      note_id: this.state.noteId,
      text: this.state.text,
      word_count: 0,
      sentences: [],
      mentions: [...this.state.mentions],
      status: {
        note_id: this.state.noteId,
        file_name: `${this.state.noteId}.txt`,
        state: "incomplete",
        annotation_count: this.state.mentions.length,
        last_reviewed_by: "",
        last_updated: "",
        revision: this.state.baseRevision,
      },
    };
    this.renderEditor(detail);
  }
}
