/**
 * View models for the labeling loop.
 *
 * A PairCard always renders, whatever optional developer fields are
 * missing (most accounts carry no email and many no display name).
 * Emails are masked by default to keep annotators from leaning on
 * them; the full value is available behind an explicit reveal.
 */

import type { CandidateView, LabelValue } from "./api.js";

export interface PairCard {
  candidateId: number;
  authorName: string;
  authorPosition: string;
  username: string;
  devDisplayName: string;
  emailMasked: string;
  emailFull: string | null;
  similarity: number;
  articleTitle: string;
}

export function maskEmail(email: string | null): string {
  if (!email) return "—";
  const at = email.indexOf("@");
  if (at <= 0) return "—";
  return `${email[0]}…@${email.slice(at + 1)}`;
}

export function toPairCard(candidate: CandidateView): PairCard {
  return {
    candidateId: candidate.candidate_id,
    authorName: candidate.author.display_name,
    authorPosition: candidate.author.position ?? "—",
    username: candidate.developer.username,
    devDisplayName: candidate.developer.display_name ?? "—",
    emailMasked: maskEmail(candidate.developer.email),
    emailFull: candidate.developer.email,
    similarity: candidate.similarity,
    articleTitle: candidate.article_title,
  };
}

export interface UndoToken {
  candidateId: number;
  label: LabelValue;
}

export interface SessionState {
  sessionId: string | null;
  annotatorId: string;
  queueSize: number;
  labeled: number;
  remaining: number;
  card: PairCard | null;
  done: boolean;
  busy: boolean;
  offline: boolean;
  error: string | null;
  emailRevealed: boolean;
  amendPending: boolean;
  undo: UndoToken | null;
}

export function initialState(annotatorId: string): SessionState {
  return {
    sessionId: null,
    annotatorId,
    queueSize: 0,
    labeled: 0,
    remaining: 0,
    card: null,
    done: false,
    busy: false,
    offline: false,
    error: null,
    emailRevealed: false,
    amendPending: false,
    undo: null,
  };
}

/** Labeled and remaining always account for the whole queue. */
export function countsConsistent(state: SessionState): boolean {
  return state.labeled + state.remaining === state.queueSize;
}
