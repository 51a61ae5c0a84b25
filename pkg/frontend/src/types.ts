// Payload shapes of the review service API. These mirror the server
// responses exactly; the UI never recomputes statistics from ratings.

export interface OptionView {
  letter: string;
  text: string;
}

export interface RubricItemSchema {
  id: string;
  prompt: string;
  responses: string[];
}

export interface QuestionSummary {
  id: string;
  stem: string;
  options: OptionView[];
  bloom_level: string;
  grade_band: { low: number; high: number };
  learning_objective: string;
  scenario: string | null;
  rated_by: string[];
}

export interface QuestionList {
  questions: QuestionSummary[];
  progress: Record<string, number>;
  total: number;
}

export interface QuestionDetail {
  id: string;
  stem: string;
  options: OptionView[];
  bloom_level: string;
  grade_band: { low: number; high: number };
  learning_objective: string;
  scenario: string | null;
  rubric: RubricItemSchema[];
  // Present only after this rater has submitted a rating.
  key?: string;
}

export interface RatingSubmission {
  rater_id: string;
  question_id: string;
  responses: Record<string, string>;
  chosen_answer: string;
  timestamp?: string;
}

export interface CriterionStats {
  distribution: Record<string, Record<string, number>>;
  summary_per_rater: Record<string, number>;
  summary_mean: number;
}

export interface EvalReport {
  question_counts: Record<string, number>;
  key_agreement: Record<string, number>;
  criteria: Record<string, CriterionStats>;
  pairwise: Record<string, Record<string, number>>;
  fleiss_kappa: Record<string, number | null>;
  warnings: string[];
}
