import type { LexiconElement, LexiconView, Mention } from "./types.js";

export interface PopupGroup {
  category: string;
  elements: LexiconElement[];
}

export type EditIntent =
  | { kind: "add"; element_id: string; start: number; end: number }
  | { kind: "relabel"; target: Mention; element_id: string };

/** Elements whose display name starts with the prefix, in category order. */
export function filterByPrefix(
  elements: readonly LexiconElement[],
  prefix: string,
  categories: readonly string[],
): LexiconElement[] {
  const p = prefix.toLowerCase();
  const order = new Map(categories.map((c, i) => [c, i]));
  return elements
    .filter((e) => e.name.toLowerCase().startsWith(p))
    .sort((a, b) => (order.get(a.category) ?? order.size) - (order.get(b.category) ?? order.size));
}

export function groupByCategory(
  elements: readonly LexiconElement[],
  categories: readonly string[],
): PopupGroup[] {
  const groups: PopupGroup[] = [];
  for (const category of categories) {
    const members = elements.filter((e) => e.category === category);
    if (members.length) groups.push({ category, elements: members });
  }
  return groups;
}

/**
 * Headless controller for the data element reminder. Opens over a selected
 * span (add) or an existing mention (relabel); typing narrows by name prefix,
 * arrow keys move the highlight, Enter or a click chooses.
 */
export class ReminderPopup {
  private prefix = "";
  private index = 0;

  constructor(
    private readonly lexicon: LexiconView,
    readonly selection: { start: number; end: number },
    readonly target: Mention | null = null,
  ) {}

  get items(): LexiconElement[] {
    return filterByPrefix(this.lexicon.elements, this.prefix, this.lexicon.categories);
  }

  get groups(): PopupGroup[] {
    return groupByCategory(this.items, this.lexicon.categories);
  }

  get typedPrefix(): string {
    return this.prefix;
  }

  type(prefix: string): void {
    this.prefix = prefix;
    this.index = 0;
  }

  get highlighted(): LexiconElement | null {
    return this.items[this.index] ?? null;
  }

  move(delta: number): void {
    const n = this.items.length;
    if (n === 0) return;
    this.index = ((this.index + delta) % n + n) % n;
  }

  choose(element?: LexiconElement): EditIntent | null {
    const el = element ?? this.highlighted;
    if (!el) return null;
    if (this.target) {
      return { kind: "relabel", target: this.target, element_id: el.element_id };
    }
    return { kind: "add", element_id: el.element_id, start: this.selection.start, end: this.selection.end };
  }
}
