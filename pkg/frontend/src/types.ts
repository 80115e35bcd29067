// Wire types mirroring the annotation service API.

export type Assertion = "affirmed" | "negated";

export interface Mention {
  element_id: string;
  start: number;
  end: number;
  surface: string;
  assertion: Assertion;
  source: string;
}

export interface SentenceSpan {
  index: number;
  start: number;
  end: number;
}

export interface NoteStatus {
  note_id: string;
  file_name: string;
  state: "incomplete" | "complete";
  annotation_count: number;
  last_reviewed_by: string;
  last_updated: string;
  revision: number;
}

export interface NoteList {
  notes: NoteStatus[];
  complete_count: number;
  incomplete_count: number;
  total: number;
}

export interface NoteDetail {
  note_id: string;
  text: string;
  word_count: number;
  sentences: SentenceSpan[];
  mentions: Mention[];
  status: NoteStatus;
}

export interface LexiconElement {
  element_id: string;
  name: string;
  category: string;
  concept_ids: string[];
  synonyms: string[];
}

export interface LexiconView {
  categories: string[];
  elements: LexiconElement[];
}

export interface SaveResponse {
  status: NoteStatus;
  next_note_id: string | null;
}

export type EventKind = "key" | "mouse" | "pause" | "resume" | "save" | "complete";

export interface InteractionEvent {
  timestamp_ms: number;
  user: string;
  note_id: string;
  kind: EventKind;
  detail: string;
}
