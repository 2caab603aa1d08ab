import type { ApiClient } from "./api.js";
import { LABELS, type DisagreementRow } from "./types.js";

export interface ReviewRow extends DisagreementRow {
  /** label -> how many annotators chose it */
  histogram: Record<number, number>;
}

export function labelHistogram(labels: readonly number[]): Record<number, number> {
  const histogram: Record<number, number> = {};
  for (const label of LABELS) histogram[label] = 0;
  for (const label of labels) histogram[label] = (histogram[label] ?? 0) + 1;
  return histogram;
}

/** Ranked disagreement list for a round (coordinator only; 403 otherwise). */
export async function loadReview(
  api: ApiClient,
  roundId: string,
): Promise<ReviewRow[]> {
  const rows = await api.disagreements(roundId);
  return rows.map((row) => ({ ...row, histogram: labelHistogram(row.labels) }));
}
