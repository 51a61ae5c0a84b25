// Thin typed client for the review service. All network access of the UI
// goes through this module and only touches the documented /api endpoints.

import type { EvalReport, QuestionDetail, QuestionList, RatingSubmission } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

async function throwApiError(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body?.detail?.code) {
      code = body.detail.code;
      message = body.detail.message ?? message;
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) await throwApiError(response);
    return (await response.json()) as T;
  }

  listQuestions(): Promise<QuestionList> {
    return this.getJson<QuestionList>("/api/questions");
  }

  getQuestion(id: string, raterId?: string): Promise<QuestionDetail> {
    const query = raterId ? `?rater_id=${encodeURIComponent(raterId)}` : "";
    return this.getJson<QuestionDetail>(`/api/questions/${encodeURIComponent(id)}${query}`);
  }

  async submitRating(rating: RatingSubmission, overwrite = false): Promise<{ stored: boolean; key: string }> {
    const query = overwrite ? "?overwrite=true" : "";
    const response = await this.fetchFn(`${this.baseUrl}/api/ratings${query}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(rating),
    });
    if (!response.ok) await throwApiError(response);
    return (await response.json()) as { stored: boolean; key: string };
  }

  getReport(): Promise<EvalReport> {
    return this.getJson<EvalReport>("/api/report");
  }
}
