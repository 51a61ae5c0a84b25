// DOM builders for the two views: the question stepper and the report
// dashboard. No framework; plain elements and callbacks.

import type { Draft } from "./rubric.js";
import { missingItems } from "./rubric.js";
import type { EvalReport, QuestionDetail } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface StepperCallbacks {
  onChooseAnswer(text: string): void;
  onRespond(itemId: string, response: string): void;
  onSubmit(): void;
  onBack(): void;
}

export function renderStepper(
  container: HTMLElement,
  question: QuestionDetail,
  draft: Draft,
  progressText: string,
  callbacks: StepperCallbacks,
  errorText = "",
  highlightItem = "",
): void {
  container.replaceChildren();

  const header = el("div", "stepper-header");
  header.appendChild(el("span", "progress", progressText));
  header.appendChild(
    el("span", "meta", `${question.bloom_level} · grades ${question.grade_band.low}-${question.grade_band.high}`),
  );
  container.appendChild(header);

  container.appendChild(el("p", "objective", `Objective: ${question.learning_objective}`));
  container.appendChild(el("h2", "stem", question.stem));

  const optionsBox = el("div", "options");
  for (const option of question.options) {
    const label = el("label", "option");
    const input = el("input") as HTMLInputElement;
    input.type = "radio";
    input.name = "chosen";
    input.value = option.text;
    input.checked = draft.chosen_answer === option.text;
    input.addEventListener("change", () => callbacks.onChooseAnswer(option.text));
    label.appendChild(input);
    label.appendChild(el("span", "option-letter", `${option.letter}.`));
    label.appendChild(el("span", "option-text", option.text));
    optionsBox.appendChild(label);
  }
  container.appendChild(optionsBox);

  container.appendChild(el("h3", undefined, "Rubric"));
  const rubricBox = el("div", "rubric");
  for (const item of question.rubric) {
    const row = el("div", item.id === highlightItem ? "rubric-item missing" : "rubric-item");
    row.dataset.item = item.id;
    row.appendChild(el("p", "rubric-prompt", `${item.id}: ${item.prompt}`));
    const choices = el("div", "rubric-choices");
    for (const response of item.responses) {
      const label = el("label");
      const input = el("input") as HTMLInputElement;
      input.type = "radio";
      input.name = `rubric-${item.id}`;
      input.value = response;
      input.checked = draft.responses[item.id] === response;
      input.addEventListener("change", () => callbacks.onRespond(item.id, response));
      label.appendChild(input);
      label.appendChild(el("span", undefined, response));
      choices.appendChild(label);
    }
    row.appendChild(choices);
    rubricBox.appendChild(row);
  }
  container.appendChild(rubricBox);

  if (errorText) {
    container.appendChild(el("p", "error", errorText));
  }

  const nav = el("div", "nav");
  const backButton = el("button", "secondary", "Back");
  backButton.addEventListener("click", callbacks.onBack);
  nav.appendChild(backButton);

  const submitButton = el("button", "primary", "Submit rating");
  const incomplete = !draft.chosen_answer || missingItems(draft, question.rubric).length > 0;
  submitButton.disabled = incomplete;
  submitButton.addEventListener("click", callbacks.onSubmit);
  nav.appendChild(submitButton);
  container.appendChild(nav);
}

export function renderSubmitted(container: HTMLElement, key: string, chosen: string, onNext: () => void): void {
  container.replaceChildren();
  const agreed = key === chosen;
  container.appendChild(el("h2", undefined, "Rating stored"));
  container.appendChild(el("p", undefined, `The system's key: ${key}`));
  container.appendChild(
    el("p", agreed ? "agree" : "disagree", agreed ? "You chose the same option." : `You chose: ${chosen}`),
  );
  const next = el("button", "primary", "Next question");
  next.addEventListener("click", onNext);
  container.appendChild(next);
}

/** Display formatting: one decimal, matching the CLI's rendering. */
export function formatPct(value: number): string {
  return value.toFixed(1);
}

export function renderReport(container: HTMLElement, report: EvalReport, raters: string[]): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, "Evaluation report"));

  if (raters.length === 0) {
    container.appendChild(el("p", "empty", "No ratings submitted yet."));
    return;
  }

  const counts = el("p", "counts");
  counts.textContent = raters.map((rater) => `${rater}: ${report.question_counts[rater]} rated`).join(" · ");
  container.appendChild(counts);

  const keyBox = el("section", "criterion");
  keyBox.appendChild(el("h3", undefined, "Key agreement"));
  for (const rater of raters) {
    keyBox.appendChild(bar(rater, report.key_agreement[rater]));
  }
  container.appendChild(keyBox);

  for (const [name, stats] of Object.entries(report.criteria)) {
    const section = el("section", "criterion");
    const mean = raters.length > 1 ? ` (average ${formatPct(stats.summary_mean)})` : "";
    section.appendChild(el("h3", undefined, `${name}${mean}`));
    for (const rater of raters) {
      section.appendChild(bar(rater, stats.summary_per_rater[rater]));
    }
    container.appendChild(section);
  }
}

function bar(label: string, value: number): HTMLElement {
  const row = el("div", "bar-row");
  row.appendChild(el("span", "bar-label", label));
  const track = el("div", "bar-track");
  const fill = el("div", "bar-fill");
  fill.style.width = `${Math.max(0, Math.min(100, value))}%`;
  track.appendChild(fill);
  row.appendChild(track);
  row.appendChild(el("span", "bar-value", formatPct(value)));
  return row;
}
