// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";

import { emptyDraft } from "../src/rubric.js";
import { formatPct, renderReport, renderStepper } from "../src/render.js";
import type { EvalReport, QuestionDetail } from "../src/types.js";

const QUESTION: QuestionDetail = {
  id: "q001",
  stem: "Which statement describes how a spam filter sorts email?",
  options: [
    { letter: "A", text: "first option" },
    { letter: "B", text: "second option" },
  ],
  bloom_level: "Understand",
  grade_band: { low: 7, high: 9 },
  learning_objective: "understand filters",
  scenario: null,
  rubric: [
    { id: "Understandable", prompt: "Could you understand it?", responses: ["yes", "no"] },
    { id: "Clear", prompt: "Is it clear?", responses: ["yes", "more_or_less", "no"] },
  ],
};

function container(): HTMLElement {
  const node = document.createElement("div");
  document.body.appendChild(node);
  return node;
}

const callbacks = () => ({
  onChooseAnswer: vi.fn(),
  onRespond: vi.fn(),
  onSubmit: vi.fn(),
  onBack: vi.fn(),
});

describe("renderStepper", () => {
  it("shows no key marking anywhere", () => {
    const node = container();
    renderStepper(node, QUESTION, emptyDraft(), "1 of 2", callbacks());
    expect(node.innerHTML).not.toContain("key");
    expect(node.querySelectorAll(".option").length).toBe(2);
  });

  it("disables submit until the draft is complete", () => {
    const node = container();
    renderStepper(node, QUESTION, emptyDraft(), "1 of 2", callbacks());
    const submit = node.querySelector("button.primary") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);

    const complete = {
      chosen_answer: "first option",
      responses: { Understandable: "yes", Clear: "yes" },
    };
    renderStepper(node, QUESTION, complete, "1 of 2", callbacks());
    const enabled = node.querySelector("button.primary") as HTMLButtonElement;
    expect(enabled.disabled).toBe(false);
  });

  it("highlights the offending rubric item on validation errors", () => {
    const node = container();
    renderStepper(node, QUESTION, emptyDraft(), "1 of 2", callbacks(), "answer everything", "Clear");
    const highlighted = node.querySelector(".rubric-item.missing") as HTMLElement;
    expect(highlighted.dataset.item).toBe("Clear");
    expect(node.querySelector(".error")?.textContent).toContain("answer everything");
  });

  it("wires rubric radio changes to the callback", () => {
    const node = container();
    const cb = callbacks();
    renderStepper(node, QUESTION, emptyDraft(), "1 of 2", cb);
    const radio = node.querySelector('input[name="rubric-Clear"][value="more_or_less"]') as HTMLInputElement;
    radio.dispatchEvent(new Event("change"));
    expect(cb.onRespond).toHaveBeenCalledWith("Clear", "more_or_less");
  });
});

describe("renderReport", () => {
  const report: EvalReport = {
    question_counts: { expert1: 40 },
    key_agreement: { expert1: 97.5 },
    criteria: {
      LORelated: {
        distribution: { expert1: { yes: 98.33333333333333, no: 1.6666666666666667 } },
        summary_per_rater: { expert1: 98.33333333333333 },
        summary_mean: 98.33333333333333,
      },
    },
    pairwise: { LORelated: {} },
    fleiss_kappa: { LORelated: null },
    warnings: [],
  };

  it("displays API values verbatim at one decimal", () => {
    const node = container();
    renderReport(node, report, ["expert1"]);
    const values = Array.from(node.querySelectorAll(".bar-value")).map((n) => n.textContent);
    expect(values).toContain("97.5");
    expect(values).toContain("98.3"); // one-decimal display of 98.3333...
  });

  it("shows an empty state without ratings", () => {
    const node = container();
    renderReport(node, { ...report, question_counts: {} }, []);
    expect(node.querySelector(".empty")?.textContent).toContain("No ratings");
  });
});

describe("formatPct", () => {
  it("renders one decimal", () => {
    expect(formatPct(84.16666666666667)).toBe("84.2");
    expect(formatPct(35)).toBe("35.0");
  });
});
