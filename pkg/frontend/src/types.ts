/** Service payload shapes, mirrored verbatim from the /api/v1 contract.
 * The UI renders these as received; it never derives counts, probabilities,
 * or gap classes on its own. */

export type StudyType = "impact_evaluation" | "systematic_review" | "other_primary";
export type Direction = "positive" | "negative" | "non_significant";
export type GapClass = "absolute_gap" | "synthesis_gap" | "populated";
export type ScreeningStatus = "pending" | "included" | "excluded";
export type SuggestionStatus = "pending" | "confirmed" | "rejected";

export interface AxisItem {
  id: string;
  label: string;
  description: string;
}

export interface Framework {
  interventions: AxisItem[];
  outcomes: AxisItem[];
  topic_axis: "interventions" | "outcomes";
}

export interface GapConfig {
  absolute_max: number;
  synthesis_min: number;
  sr_recency_years: number;
  reference_year: number;
}

export interface ProjectRef {
  id: string;
  name: string;
}

export interface ProjectSummary {
  id: string;
  name: string;
  schema_version: number;
  framework: Framework | null;
  criteria: { query: string | null; filters: Record<string, unknown> };
  keywords: Record<string, string[]>;
  gap_config: GapConfig;
  counts: {
    corpus: number;
    pending: number;
    included: number;
    excluded: number;
    codings: number;
    suggestions: number;
  };
  has_model: boolean;
  model_warnings: string[];
  active_job: string | null;
}

export interface ScreeningDecision {
  doc: string;
  decision: "included" | "excluded";
  reason: string | null;
  reviewer: string;
  timestamp: string;
}

export interface QueueDoc {
  id: string;
  title: string;
  abstract: string;
  doi: string | null;
  year: number | null;
  authors: string[];
  venue: string | null;
  source: string;
  status: ScreeningStatus;
  decision: ScreeningDecision | null;
}

export interface ScreeningQueue {
  status: string;
  docs: QueueDoc[];
  counts: { pending: number; included: number; excluded: number };
}

export interface Suggestion {
  id: string;
  doc: string;
  topic: string;
  probability: number;
  status: SuggestionStatus;
  // present on GET /model/suggestions, absent on the POST echo
  title?: string | null;
  year?: number | null;
}

export interface SuggestionList {
  topic: string;
  tau: number;
  suggestions: Suggestion[];
}

export interface StudyAttributes {
  study_type: StudyType;
  geography?: string | null;
  population?: string | null;
  status?: string | null;
  quality_rating?: string | null;
}

export interface CodingRequest {
  doc: string;
  intervention: string;
  outcome: string;
  direction: Direction;
  attributes: StudyAttributes;
  reviewer?: string;
}

export interface Coding {
  doc: string;
  intervention: string;
  outcome: string;
  direction: Direction;
  attributes: Required<StudyAttributes>;
  reviewer: string;
  timestamp: string;
  orphaned: boolean;
}

export interface CellStudy {
  doc: string;
  direction: Direction;
  study_type: StudyType;
  year: number | null;
  quality_rating: string | null;
}

export interface EgmCell {
  intervention: string;
  outcome: string;
  n_impact_evaluations: number;
  n_systematic_reviews: number;
  n_other_primary: number;
  n_positive: number;
  n_negative: number;
  n_non_significant: number;
  newest_sr_year: number | null;
  gap_class: GapClass;
  total: number;
  studies: CellStudy[];
}

export interface EgmFilters {
  geography?: string;
  study_type?: string;
  population?: string;
  quality?: string;
}

export interface EgmMatrix {
  interventions: AxisItem[];
  outcomes: AxisItem[];
  cells: EgmCell[];
  gap_config: GapConfig;
  filters: EgmFilters;
  methodology: Record<string, unknown>;
}

export interface Job {
  id: string;
  project_id: string;
  kind: "search" | "fit";
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
  result: Record<string, unknown> | null;
}
