/**
 * In-memory stand-in for the annotation service, mirroring its API
 * semantics: similarity-ordered queues of unlabeled candidates,
 * cursor advance on submission, label overwrite with history, kappa
 * over the doubly-labeled overlap excluding "unclear".
 */

import { ApiError } from "../src/api.js";
import type {
  AgreementReport,
  AnnotationApi,
  CandidateView,
  LabelAck,
  LabelValue,
  NextResponse,
  ProgressReport,
  SessionInfo,
} from "../src/api.js";

interface StoredLabel {
  label: LabelValue;
  superseded: boolean;
}

interface FakeSession {
  sessionId: string;
  annotatorId: string;
  queue: number[];
  cursor: number;
}

export function makeCandidate(
  id: number,
  similarity: number,
  overrides: Partial<CandidateView> = {},
): CandidateView {
  return {
    candidate_id: id,
    similarity,
    author: {
      author_id: `A${id}`,
      display_name: `Author ${id}`,
      position: "middle",
    },
    developer: {
      dev_id: `D${id}`,
      username: `dev${id}`,
      display_name: null,
      email: null,
    },
    article_title: `Article ${id}`,
    ...overrides,
  };
}

export class FakeAnnotationService implements AnnotationApi {
  private sessions = new Map<string, FakeSession>();
  private labels = new Map<string, StoredLabel[]>(); // "candidate|annotator"
  private nextSessionId = 1;
  /** Inject failures: each entry rejects one submitLabel call. */
  failures: Array<ApiError | Error> = [];

  constructor(private readonly candidates: CandidateView[]) {}

  private key(candidateId: number, annotatorId: string): string {
    return `${candidateId}|${annotatorId}`;
  }

  private activeLabel(candidateId: number, annotatorId: string): LabelValue | null {
    const history = this.labels.get(this.key(candidateId, annotatorId)) ?? [];
    const active = history.find((entry) => !entry.superseded);
    return active ? active.label : null;
  }

  totalLabels(): number {
    let count = 0;
    for (const history of this.labels.values()) {
      if (history.some((entry) => !entry.superseded)) count += 1;
    }
    return count;
  }

  labelHistory(candidateId: number, annotatorId: string): LabelValue[] {
    const history = this.labels.get(this.key(candidateId, annotatorId)) ?? [];
    return history.map((entry) => entry.label);
  }

  async openSession(annotatorId: string, limit?: number): Promise<SessionInfo> {
    const unlabeled = this.candidates
      .filter((c) => this.activeLabel(c.candidate_id, annotatorId) === null)
      .sort(
        (a, b) => b.similarity - a.similarity || a.candidate_id - b.candidate_id,
      )
      .map((c) => c.candidate_id);
    const queue = limit === undefined ? unlabeled : unlabeled.slice(0, limit);
    const session: FakeSession = {
      sessionId: `s${this.nextSessionId++}`,
      annotatorId,
      queue,
      cursor: 0,
    };
    this.sessions.set(session.sessionId, session);
    return {
      session_id: session.sessionId,
      annotator_id: annotatorId,
      queue_size: queue.length,
    };
  }

  async nextPair(sessionId: string): Promise<NextResponse> {
    const session = this.sessions.get(sessionId);
    if (!session) throw new ApiError(404, `unknown session: ${sessionId}`);
    if (session.cursor >= session.queue.length) {
      return { done: true, labeled: session.cursor, remaining: 0 };
    }
    const candidate = this.candidates.find(
      (c) => c.candidate_id === session.queue[session.cursor],
    );
    return {
      done: false,
      candidate,
      labeled: session.cursor,
      remaining: session.queue.length - session.cursor,
    };
  }

  async submitLabel(
    candidateId: number,
    annotatorId: string,
    label: LabelValue,
  ): Promise<LabelAck> {
    const failure = this.failures.shift();
    if (failure) throw failure;
    if (!this.candidates.some((c) => c.candidate_id === candidateId)) {
      throw new ApiError(404, `unknown candidate: ${candidateId}`);
    }
    if (!["match", "non_match", "unclear"].includes(label)) {
      throw new ApiError(422, `invalid label: ${label}`);
    }
    const key = this.key(candidateId, annotatorId);
    const history = this.labels.get(key) ?? [];
    const active = history.find((entry) => !entry.superseded);
    let stored = false;
    if (!active || active.label !== label) {
      if (active) active.superseded = true;
      history.push({ label, superseded: false });
      stored = true;
    }
    this.labels.set(key, history);

    let advanced = false;
    for (const session of this.sessions.values()) {
      if (
        session.annotatorId === annotatorId &&
        session.cursor < session.queue.length &&
        session.queue[session.cursor] === candidateId
      ) {
        session.cursor += 1;
        advanced = true;
      }
    }
    return { status: "ok", stored, cursor_advanced: advanced };
  }

  async agreement(): Promise<AgreementReport> {
    const byAnnotator = new Map<string, Map<number, LabelValue>>();
    for (const [key, history] of this.labels.entries()) {
      const active = history.find((entry) => !entry.superseded);
      if (!active || active.label === "unclear") continue;
      const [candidate, annotator] = key.split("|");
      if (!byAnnotator.has(annotator)) byAnnotator.set(annotator, new Map());
      byAnnotator.get(annotator)!.set(Number(candidate), active.label);
    }
    const annotators = [...byAnnotator.keys()].sort();
    let best: [string, string] | null = null;
    let bestOverlap: number[] = [];
    for (let i = 0; i < annotators.length; i++) {
      for (let j = i + 1; j < annotators.length; j++) {
        const a = byAnnotator.get(annotators[i])!;
        const b = byAnnotator.get(annotators[j])!;
        const overlap = [...a.keys()].filter((c) => b.has(c));
        if (overlap.length > bestOverlap.length) {
          best = [annotators[i], annotators[j]];
          bestOverlap = overlap;
        }
      }
    }
    if (!best || bestOverlap.length === 0) {
      throw new ApiError(409, "need two annotators sharing a labeled pair");
    }
    bestOverlap.sort((x, y) => x - y);
    const labelsA = bestOverlap.map((c) => byAnnotator.get(best![0])!.get(c)!);
    const labelsB = bestOverlap.map((c) => byAnnotator.get(best![1])!.get(c)!);
    return {
      kappa: cohensKappa(labelsA, labelsB),
      annotators: best,
      n_overlap: bestOverlap.length,
      disagreements: bestOverlap
        .filter((c, i) => labelsA[i] !== labelsB[i])
        .map((c) => ({
          candidate_id: c,
          labels: {
            [best![0]]: byAnnotator.get(best![0])!.get(c)!,
            [best![1]]: byAnnotator.get(best![1])!.get(c)!,
          },
        })),
    };
  }

  async progress(): Promise<ProgressReport> {
    return {
      sessions: [...this.sessions.values()].map((s) => ({
        session_id: s.sessionId,
        annotator_id: s.annotatorId,
        labeled: s.cursor,
        remaining: s.queue.length - s.cursor,
        queue_size: s.queue.length,
      })),
      total_labels: this.totalLabels(),
    };
  }
}

function cohensKappa(a: string[], b: string[]): number {
  const n = a.length;
  const observed = a.filter((x, i) => x === b[i]).length / n;
  const countsA = new Map<string, number>();
  const countsB = new Map<string, number>();
  for (const x of a) countsA.set(x, (countsA.get(x) ?? 0) + 1);
  for (const y of b) countsB.set(y, (countsB.get(y) ?? 0) + 1);
  let expected = 0;
  for (const [category, count] of countsA.entries()) {
    expected += (count / n) * ((countsB.get(category) ?? 0) / n);
  }
  if (expected >= 1) return observed >= 1 ? 1 : NaN;
  return (observed - expected) / (1 - expected);
}
