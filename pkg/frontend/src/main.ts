// App wiring: hash routing between the rating flow and the report view.

import { ApiClient, ApiError } from "./api.js";
import { missingItems } from "./rubric.js";
import { renderReport, renderStepper, renderSubmitted } from "./render.js";
import { ReviewSession } from "./session.js";
import type { QuestionDetail } from "./types.js";

const api = new ApiClient();
let session: ReviewSession | null = null;

function app(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function raterId(): string {
  let id = localStorage.getItem("mcqforge:rater") ?? "";
  while (!id) {
    id = (window.prompt("Enter your rater id:") ?? "").trim();
  }
  localStorage.setItem("mcqforge:rater", id);
  return id;
}

async function ensureSession(): Promise<ReviewSession> {
  if (session) return session;
  const list = await api.listQuestions();
  session = new ReviewSession(
    raterId(),
    list.questions.map((q) => q.id),
    localStorage,
  );
  return session;
}

async function showStepper(errorText = "", highlightItem = ""): Promise<void> {
  const s = await ensureSession();
  const questionId = s.currentQuestionId;
  if (!questionId) {
    app().innerHTML = "<h2>All questions rated. See the <a href='#/report'>report</a>.</h2>";
    return;
  }
  const question: QuestionDetail = await api.getQuestion(questionId, s.raterId);
  if ("key" in question) {
    // Server only reveals the key after this rater submitted; skip ahead.
    s.advance();
    if (s.currentQuestionId === questionId) {
      app().innerHTML = "<h2>All questions rated. See the <a href='#/report'>report</a>.</h2>";
      return;
    }
    return showStepper();
  }

  const draft = s.draft(questionId);
  renderStepper(
    app(),
    question,
    draft,
    `Question ${s.index + 1} of ${s.queue.length} — rater ${s.raterId}`,
    {
      onChooseAnswer(text) {
        s.setChosenAnswer(questionId, text);
        void showStepper();
      },
      onRespond(itemId, response) {
        s.setResponse(questionId, itemId, response);
        void showStepper();
      },
      async onSubmit() {
        const current = s.draft(questionId);
        const missing = missingItems(current, question.rubric);
        if (!current.chosen_answer || missing.length > 0) {
          void showStepper("Answer the question and every rubric item.", missing[0] ?? "");
          return;
        }
        try {
          const result = await api.submitRating({
            rater_id: s.raterId,
            question_id: questionId,
            responses: current.responses,
            chosen_answer: current.chosen_answer,
          });
          s.clearDraft(questionId);
          renderSubmitted(app(), result.key, current.chosen_answer, () => {
            s.advance();
            void showStepper();
          });
        } catch (error) {
          if (error instanceof ApiError && error.status === 409) {
            s.clearDraft(questionId);
            s.advance();
            void showStepper();
            return;
          }
          const message = error instanceof Error ? error.message : String(error);
          void showStepper(`Submission failed (${message}); retry.`);
        }
      },
      onBack() {
        s.back();
        void showStepper();
      },
    },
    errorText,
    highlightItem,
  );
}

async function showReport(): Promise<void> {
  const report = await api.getReport();
  const raters = Object.keys(report.question_counts).sort();
  renderReport(app(), report, raters);
  const refresh = document.createElement("button");
  refresh.textContent = "Refresh";
  refresh.className = "secondary";
  refresh.addEventListener("click", () => void showReport());
  app().prepend(refresh);
}

function route(): void {
  const hash = window.location.hash || "#/rate";
  if (hash.startsWith("#/report")) {
    void showReport().catch(showFatal);
  } else {
    void showStepper().catch(showFatal);
  }
}

function showFatal(error: unknown): void {
  const message = error instanceof Error ? error.message : String(error);
  app().innerHTML = `<p class="error">Service error: ${message}. <button onclick="location.reload()">Retry</button></p>`;
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
