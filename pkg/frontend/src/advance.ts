import type { ApiClient } from "./api.js";
import { ConflictError } from "./api.js";
import type { EditorState } from "./editor.js";

export interface Navigator {
  openNote(noteId: string): void;
  openOverview(): void;
}

export type SaveOutcome =
  | { kind: "saved"; nextNoteId: string | null }
  | { kind: "conflict"; detail: string }
  | { kind: "error"; detail: string };

/**
 * Persist the editor's mentions. On a completing save, advance to the next
 * incomplete note; when none is left, fall back to the overview. Conflicts
 * and errors leave the local state untouched so nothing is lost.
 */
export async function saveAndAdvance(
  api: ApiClient,
  state: EditorState,
  markComplete: boolean,
  nav: Navigator,
): Promise<SaveOutcome> {
  let response;
  try {
    response = await api.saveAnnotations(state.noteId, state.mentions, state.baseRevision, markComplete);
  } catch (err) {
    if (err instanceof ConflictError) {
      return { kind: "conflict", detail: err.message };
    }
    return { kind: "error", detail: err instanceof Error ? err.message : String(err) };
  }
  state.markSaved(response.status.revision);
  if (markComplete) {
    if (response.next_note_id) {
      nav.openNote(response.next_note_id);
    } else {
      nav.openOverview();
    }
  }
  return { kind: "saved", nextNoteId: response.next_note_id };
}
