// Draft-completeness rules: a rating can be submitted only when the rater
// has picked an answer and responded to every rubric item.

import type { RubricItemSchema } from "./types.js";

export interface Draft {
  chosen_answer?: string;
  responses: Record<string, string>;
}

export function emptyDraft(): Draft {
  return { responses: {} };
}

/** Ids of rubric items still unanswered, in rubric order. */
export function missingItems(draft: Draft, rubric: RubricItemSchema[]): string[] {
  return rubric.filter((item) => !(item.id in draft.responses)).map((item) => item.id);
}

export function isComplete(draft: Draft, rubric: RubricItemSchema[]): boolean {
  return Boolean(draft.chosen_answer) && missingItems(draft, rubric).length === 0;
}

/** Reject responses outside an item's closed set before they reach a draft. */
export function isValidResponse(rubric: RubricItemSchema[], itemId: string, response: string): boolean {
  const item = rubric.find((entry) => entry.id === itemId);
  return Boolean(item && item.responses.includes(response));
}
