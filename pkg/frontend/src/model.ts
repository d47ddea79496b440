/** Labeling-session state machine; pure and DOM-free.
 *
 * Holds the current display, the operator's per-item choices, and the
 * metric history. Every history point is copied verbatim from a server
 * response; the model never computes metrics of its own.
 */

import type {
  BudgetInfo,
  DisplayItem,
  HistoryPoint,
  LabelResponse,
  SessionCreated,
  SessionStatus,
} from "./types.js";

export type Label = 0 | 1;

export class SessionModel {
  sessionId: string;
  display: DisplayItem[];
  budget: BudgetInfo;
  iteration: number;
  done = false;
  qValues: number[] | null = null;
  history: HistoryPoint[] = [];
  sampPct = 0;
  private choices = new Map<number, Label>();

  constructor(created: SessionCreated) {
    this.sessionId = created.session_id;
    this.display = created.display;
    this.budget = created.budget;
    this.iteration = created.iteration;
  }

  setLabel(itemId: number, label: Label): void {
    if (!this.display.some((it) => it.id === itemId)) {
      throw new Error(`item ${itemId} is not in the current display`);
    }
    this.choices.set(itemId, label);
  }

  clearLabel(itemId: number): void {
    this.choices.delete(itemId);
  }

  labelOf(itemId: number): Label | undefined {
    return this.choices.get(itemId);
  }

  get labeledCount(): number {
    return this.display.filter((it) => this.choices.has(it.id)).length;
  }

  /** Submit is allowed only when every displayed item carries a choice. */
  get canSubmit(): boolean {
    return (
      !this.done &&
      this.display.length > 0 &&
      this.display.every((it) => this.choices.has(it.id))
    );
  }

  /** Labels payload in display order; throws if any item is unlabeled. */
  payload(): Array<{ id: number; label: Label }> {
    if (!this.canSubmit) {
      throw new Error("cannot submit: unlabeled items remain");
    }
    return this.display.map((it) => ({
      id: it.id,
      label: this.choices.get(it.id) as Label,
    }));
  }

  /** Absorb a label-submission response: advance to the next display. */
  applyLabelResponse(resp: LabelResponse): void {
    this.history.push({
      iteration: resp.metrics.iteration,
      samp_pct: resp.metrics.samp_pct,
      eer: resp.metrics.eer,
      reward: resp.metrics.reward,
      display_size: resp.metrics.display_size,
    });
    this.sampPct = resp.metrics.samp_pct;
    this.iteration = resp.metrics.iteration;
    this.budget = {
      max_labels: this.budget.max_labels,
      used: this.budget.used + this.display.length,
    };
    this.display = resp.next_display;
    this.done = resp.done;
    this.choices.clear();
  }

  /** Re-sync to authoritative server state (409 recovery, tab focus). */
  resyncFromStatus(status: SessionStatus): void {
    this.display = status.current_display;
    this.iteration = status.iteration;
    this.sampPct = status.samp_pct;
    this.budget = status.budget;
    this.done = status.done;
    this.qValues = status.q_values;
    this.history = status.eer_history.map((p) => ({ ...p }));
    this.choices.clear();
  }

  applyStatusExtras(status: SessionStatus): void {
    this.qValues = status.q_values;
  }
}

/** Mirror of the server-side check so the form can reject early. */
export function validateConfigForm(
  budgetFraction: number,
  initialSize: number,
  trainSize: number,
): string | null {
  if (!(budgetFraction > 0 && budgetFraction <= 1)) {
    return "budget fraction must lie in (0, 1]";
  }
  if (initialSize < 1) {
    return "display size must be at least 1";
  }
  const budget = Math.ceil(budgetFraction * trainSize);
  if (budget < initialSize) {
    return `budget (${budget} labels) is smaller than the initial display (${initialSize})`;
  }
  return null;
}

/** Train-half size the server will use (stratified split of truth pools). */
export function trainSizeOf(poolN: number, hasTruth: boolean): number {
  return hasTruth ? Math.ceil(poolN / 2) : poolN;
}
