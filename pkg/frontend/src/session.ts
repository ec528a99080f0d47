/** UI session state.
 *
 * Everything here derives from service responses; the UI never invents
 * numbers. The per-dataset train flag backs the disabled state of the
 * train button while a train job is active.
 */

import type { PivotAgg, PivotBy, ScoreRow } from "./api.js";

export interface UiSession {
  dataset: string | null;
  trainJobId: string | null;
  scoreJobId: string | null;
  scoreRows: ScoreRow[] | null;
  pivotBy: PivotBy;
  pivotAgg: PivotAgg;
  trainActive: boolean;
}

export function newSession(): UiSession {
  return {
    dataset: null,
    trainJobId: null,
    scoreJobId: null,
    scoreRows: null,
    pivotBy: "question_id",
    pivotAgg: "mean",
    trainActive: false,
  };
}
