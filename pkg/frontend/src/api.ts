import type {
  InteractionEvent,
  LexiconView,
  Mention,
  NoteDetail,
  NoteList,
  NoteStatus,
  SaveResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

/** The server rejected a save because the client's base revision is stale. */
export class ConflictError extends ApiError {
  constructor(detail: string) {
    super(409, detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiOptions {
  baseUrl?: string;
  user?: string;
  fetchFn?: FetchLike;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly user: string;
  private readonly fetchFn: FetchLike;

  constructor(options: ApiOptions = {}) {
    this.baseUrl = options.baseUrl ?? "";
    this.user = options.user ?? "annotator";
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      ...init,
      headers: {
        "content-type": "application/json",
        "x-user": this.user,
        ...(init.headers ?? {}),
      },
    });
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 409) throw new ConflictError(detail);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listNotes(q?: string): Promise<NoteList> {
    const suffix = q ? `?q=${encodeURIComponent(q)}` : "";
    return this.request<NoteList>(`/api/notes${suffix}`);
  }

  getNote(noteId: string): Promise<NoteDetail> {
    return this.request<NoteDetail>(`/api/notes/${encodeURIComponent(noteId)}`);
  }

  saveAnnotations(
    noteId: string,
    mentions: readonly Mention[],
    baseRevision: number,
    markComplete: boolean,
  ): Promise<SaveResponse> {
    return this.request<SaveResponse>(`/api/notes/${encodeURIComponent(noteId)}/annotations`, {
      method: "PUT",
      body: JSON.stringify({
        mentions,
        base_revision: baseRevision,
        mark_complete: markComplete,
      }),
    });
  }

  recheck(noteId: string): Promise<{ status: NoteStatus }> {
    return this.request<{ status: NoteStatus }>(
      `/api/notes/${encodeURIComponent(noteId)}/recheck`,
      { method: "POST" },
    );
  }

  postEvents(events: readonly InteractionEvent[]): Promise<{ appended: number }> {
    return this.request<{ appended: number }>("/api/events", {
      method: "POST",
      body: JSON.stringify({ events }),
    });
  }

  getLexicon(prefix = ""): Promise<LexiconView> {
    const suffix = prefix ? `?prefix=${encodeURIComponent(prefix)}` : "";
    return this.request<LexiconView>(`/api/lexicon${suffix}`);
  }
}
