/** Payload shapes of the labeling service. */

export interface DisplayItem {
  id: number;
  image_urls?: { before: string; after: string };
  features?: number[];
}

export interface BudgetInfo {
  max_labels: number;
  used: number;
}

export interface SessionCreated {
  session_id: string;
  display: DisplayItem[];
  iteration: number;
  budget: BudgetInfo;
}

export interface Metrics {
  iteration: number;
  samp_pct: number;
  eer: number | null;
  reward: number | null;
  display_size: number;
}

export interface LabelResponse {
  next_display: DisplayItem[];
  metrics: Metrics;
  done: boolean;
}

export interface HistoryPoint {
  iteration: number;
  samp_pct: number;
  eer: number | null;
  reward: number | null;
  display_size: number;
}

export interface LadderInfo {
  current: number;
  min_size: number;
  max_size: number;
  step: number;
}

export interface SessionStatus {
  iteration: number;
  samp_pct: number;
  eer_history: HistoryPoint[];
  q_values: number[] | null;
  current_display: DisplayItem[];
  ladder: LadderInfo;
  budget: BudgetInfo;
  done: boolean;
}

export interface PoolInfo {
  pool_id: string;
  name: string;
  n: number;
  d: number;
  has_truth: boolean;
  has_images: boolean;
}

export interface SessionConfig {
  strategy?: string;
  combo?: string | null;
  budget_fraction?: number;
  display?: { initial?: number; min_size?: number; max_size?: number; step?: number };
  clusters?: number;
  seed?: number;
  classifier?: { max_epochs?: number };
}
