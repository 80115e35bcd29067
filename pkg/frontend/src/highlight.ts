import { mentionKey } from "./editor.js";
import type { LexiconElement, Mention } from "./types.js";

/** What the two panels should emphasize after a cross-highlight click. */
export interface HighlightState {
  mentionKeys: Set<string>;
  boldElementIds: Set<string>;
}

export const emptyHighlight = (): HighlightState => ({
  mentionKeys: new Set(),
  boldElementIds: new Set(),
});

/** Browser click on one element: light up all its mentions in the editor. */
export function highlightForElement(mentions: readonly Mention[], elementId: string): HighlightState {
  return {
    mentionKeys: new Set(mentions.filter((m) => m.element_id === elementId).map(mentionKey)),
    boldElementIds: new Set([elementId]),
  };
}

/** Browser click on a category header: all mentions of its elements. */
export function highlightForCategory(
  mentions: readonly Mention[],
  elements: readonly LexiconElement[],
  category: string,
): HighlightState {
  const ids = new Set(elements.filter((e) => e.category === category).map((e) => e.element_id));
  return {
    mentionKeys: new Set(mentions.filter((m) => ids.has(m.element_id)).map(mentionKey)),
    boldElementIds: ids,
  };
}

/** Editor click on a mention: bold exactly its element in the browser. */
export function highlightForMention(mention: Mention): HighlightState {
  return {
    mentionKeys: new Set([mentionKey(mention)]),
    boldElementIds: new Set([mention.element_id]),
  };
}
