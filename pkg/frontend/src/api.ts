import type {
  AnnotationEcho,
  Assignments,
  DisagreementRow,
  FlagRow,
  Label,
  Stats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** Thin typed wrapper over the annotation service's JSON API. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Content-Type": "application/json",
        ...(init.headers ?? {}),
      },
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  assignments(): Promise<Assignments> {
    return this.request<Assignments>("/api/assignments");
  }

  submitAnnotation(postingId: string, label: Label): Promise<AnnotationEcho> {
    return this.request<AnnotationEcho>("/api/annotations", {
      method: "POST",
      body: JSON.stringify({ posting_id: postingId, label }),
    });
  }

  disagreements(roundId: string): Promise<DisagreementRow[]> {
    return this.request<DisagreementRow[]>(
      `/api/rounds/${encodeURIComponent(roundId)}/disagreements`,
    );
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/api/stats");
  }

  flags(tauForum: number, tauPost = 0.5): Promise<FlagRow[]> {
    const query = new URLSearchParams({
      tau_forum: String(tauForum),
      tau_post: String(tauPost),
    });
    return this.request<FlagRow[]>(`/api/flags?${query}`);
  }
}
