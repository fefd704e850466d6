/**
 * Typed client for the annotation service JSON API.
 *
 * The interface is the single contract the rest of the UI depends on;
 * tests substitute an in-memory implementation with identical
 * semantics.
 */

export type LabelValue = "match" | "non_match" | "unclear";

export interface SessionInfo {
  session_id: string;
  annotator_id: string;
  queue_size: number;
}

export interface AuthorView {
  author_id: string;
  display_name: string;
  position: string | null;
}

export interface DeveloperView {
  dev_id: string;
  username: string;
  display_name: string | null;
  email: string | null;
}

export interface CandidateView {
  candidate_id: number;
  similarity: number;
  author: AuthorView;
  developer: DeveloperView;
  article_title: string;
}

export interface NextResponse {
  done: boolean;
  candidate?: CandidateView;
  labeled: number;
  remaining: number;
}

export interface LabelAck {
  status: string;
  stored: boolean;
  cursor_advanced: boolean;
}

export interface DisagreementEntry {
  candidate_id: number;
  labels: Record<string, string>;
}

export interface AgreementReport {
  kappa: number;
  annotators: string[];
  n_overlap: number;
  disagreements: DisagreementEntry[];
}

export interface ProgressSession {
  session_id: string;
  annotator_id: string;
  labeled: number;
  remaining: number;
  queue_size: number;
}

export interface ProgressReport {
  sessions: ProgressSession[];
  total_labels: number;
}

export interface AnnotationApi {
  openSession(annotatorId: string, limit?: number): Promise<SessionInfo>;
  nextPair(sessionId: string): Promise<NextResponse>;
  submitLabel(
    candidateId: number,
    annotatorId: string,
    label: LabelValue,
  ): Promise<LabelAck>;
  agreement(): Promise<AgreementReport>;
  progress(): Promise<ProgressReport>;
}

/** Service rejected the request (4xx/409); carries the HTTP status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class HttpAnnotationApi implements AnnotationApi {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async openSession(annotatorId: string, limit?: number): Promise<SessionInfo> {
    const response = await fetch(this.url("/api/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator_id: annotatorId, limit }),
    });
    return parseOrThrow<SessionInfo>(response);
  }

  async nextPair(sessionId: string): Promise<NextResponse> {
    const response = await fetch(this.url(`/api/session/${sessionId}/next`));
    return parseOrThrow<NextResponse>(response);
  }

  async submitLabel(
    candidateId: number,
    annotatorId: string,
    label: LabelValue,
  ): Promise<LabelAck> {
    const response = await fetch(this.url("/api/labels"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        candidate_id: candidateId,
        annotator_id: annotatorId,
        label,
      }),
    });
    return parseOrThrow<LabelAck>(response);
  }

  async agreement(): Promise<AgreementReport> {
    const response = await fetch(this.url("/api/agreement"));
    return parseOrThrow<AgreementReport>(response);
  }

  async progress(): Promise<ProgressReport> {
    const response = await fetch(this.url("/api/progress"));
    return parseOrThrow<ProgressReport>(response);
  }
}
