/**
 * Keyboard-first labeling loop with optimistic advance.
 *
 * Keys: m = match, n = non-match, u = unclear, e = toggle email
 * reveal, z = amend the previous decision (the next label key
 * resubmits the last candidate instead of the current one).
 *
 * A label is counted and the next card requested immediately; if the
 * service rejects the submission the state rolls back and the card is
 * retained with the error surfaced.  Network failures flip the
 * offline banner instead.
 */

import { ApiError } from "./api.js";
import type { AnnotationApi, LabelValue } from "./api.js";
import { countsConsistent, initialState, toPairCard } from "./model.js";
import type { SessionState } from "./model.js";

const KEY_LABELS: Record<string, LabelValue> = {
  m: "match",
  n: "non_match",
  u: "unclear",
};

export type Listener = (state: SessionState) => void;

export class AnnotationController {
  state: SessionState;
  private listeners: Listener[] = [];

  constructor(
    private readonly api: AnnotationApi,
    annotatorId: string,
  ) {
    this.state = initialState(annotatorId);
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    if (!countsConsistent(this.state)) {
      // never present numbers that disagree with the queue size
      this.state.remaining = this.state.queueSize - this.state.labeled;
    }
    for (const listener of this.listeners) listener(this.state);
  }

  async start(limit?: number): Promise<void> {
    const session = await this.api.openSession(this.state.annotatorId, limit);
    this.state.sessionId = session.session_id;
    this.state.queueSize = session.queue_size;
    this.state.labeled = 0;
    this.state.remaining = session.queue_size;
    await this.refreshCard();
  }

  private async refreshCard(): Promise<void> {
    if (!this.state.sessionId) return;
    const next = await this.api.nextPair(this.state.sessionId);
    this.state.done = next.done;
    this.state.labeled = next.labeled;
    this.state.remaining = next.remaining;
    this.state.card = next.done || !next.candidate ? null : toPairCard(next.candidate);
    this.state.emailRevealed = false;
    this.emit();
  }

  async handleKey(key: string): Promise<void> {
    const normalized = key.toLowerCase();
    if (normalized === "e") {
      this.state.emailRevealed = !this.state.emailRevealed;
      this.emit();
      return;
    }
    if (normalized === "z") {
      if (this.state.undo) {
        this.state.amendPending = !this.state.amendPending;
        this.emit();
      }
      return;
    }
    const label = KEY_LABELS[normalized];
    if (!label) return;
    if (this.state.amendPending && this.state.undo) {
      await this.amendLast(label);
      return;
    }
    await this.label(label);
  }

  /** Optimistically advance past the current card; roll back on rejection. */
  async label(value: LabelValue): Promise<void> {
    const card = this.state.card;
    if (!card || this.state.busy || !this.state.sessionId) return;
    const snapshot = {
      labeled: this.state.labeled,
      remaining: this.state.remaining,
      card,
    };
    this.state.busy = true;
    this.state.error = null;
    this.state.labeled += 1;
    this.state.remaining -= 1;
    this.emit();
    try {
      await this.api.submitLabel(card.candidateId, this.state.annotatorId, value);
      this.state.undo = { candidateId: card.candidateId, label: value };
      this.state.busy = false;
      this.state.offline = false;
      await this.refreshCard();
    } catch (err) {
      this.state.labeled = snapshot.labeled;
      this.state.remaining = snapshot.remaining;
      this.state.card = snapshot.card;
      this.state.busy = false;
      if (err instanceof ApiError) {
        this.state.error = err.message;
      } else {
        this.state.offline = true;
      }
      this.emit();
    }
  }

  /** Overwrite the previous decision; the current card stays put. */
  private async amendLast(value: LabelValue): Promise<void> {
    const undo = this.state.undo;
    if (!undo || !this.state.sessionId) return;
    this.state.amendPending = false;
    try {
      await this.api.submitLabel(undo.candidateId, this.state.annotatorId, value);
      this.state.undo = { candidateId: undo.candidateId, label: value };
      this.state.error = null;
      this.state.offline = false;
    } catch (err) {
      if (err instanceof ApiError) {
        this.state.error = err.message;
      } else {
        this.state.offline = true;
      }
    }
    this.emit();
  }
}
