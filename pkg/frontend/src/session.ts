// Per-rater review session: a deterministic question queue plus draft
// responses that survive page reloads via storage.

import { Draft, emptyDraft } from "./rubric.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class ReviewSession {
  readonly queue: string[];
  private position = 0;

  constructor(
    readonly raterId: string,
    questionIds: string[],
    private storage: StorageLike,
  ) {
    // Queue order is a pure function of the bank: ascending ids, so every
    // rater steps through the same sequence.
    this.queue = [...questionIds].sort();
    const saved = Number(this.storage.getItem(this.posKey()));
    if (Number.isInteger(saved) && saved >= 0 && saved < this.queue.length) {
      this.position = saved;
    }
  }

  private posKey(): string {
    return `mcqforge:${this.raterId}:position`;
  }

  private draftKey(questionId: string): string {
    return `mcqforge:${this.raterId}:draft:${questionId}`;
  }

  get currentQuestionId(): string | null {
    return this.queue[this.position] ?? null;
  }

  get index(): number {
    return this.position;
  }

  goTo(index: number): void {
    if (index < 0 || index >= this.queue.length) return;
    this.position = index;
    this.storage.setItem(this.posKey(), String(index));
  }

  advance(): void {
    this.goTo(this.position + 1);
  }

  back(): void {
    this.goTo(this.position - 1);
  }

  get atEnd(): boolean {
    return this.position >= this.queue.length - 1;
  }

  draft(questionId: string): Draft {
    const raw = this.storage.getItem(this.draftKey(questionId));
    if (!raw) return emptyDraft();
    try {
      const parsed = JSON.parse(raw) as Draft;
      return { chosen_answer: parsed.chosen_answer, responses: parsed.responses ?? {} };
    } catch {
      return emptyDraft();
    }
  }

  private saveDraft(questionId: string, draft: Draft): void {
    this.storage.setItem(this.draftKey(questionId), JSON.stringify(draft));
  }

  setChosenAnswer(questionId: string, text: string): Draft {
    const draft = this.draft(questionId);
    draft.chosen_answer = text;
    this.saveDraft(questionId, draft);
    return draft;
  }

  setResponse(questionId: string, itemId: string, response: string): Draft {
    const draft = this.draft(questionId);
    draft.responses[itemId] = response;
    this.saveDraft(questionId, draft);
    return draft;
  }

  clearDraft(questionId: string): void {
    this.storage.removeItem(this.draftKey(questionId));
  }
}
