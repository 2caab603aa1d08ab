import type { FlagRow } from "./types.js";

/** Rows sorted by positive rate descending, ties broken by forum id. */
export function sortByRateDesc(rows: readonly FlagRow[]): FlagRow[] {
  return [...rows].sort(
    (a, b) => b.rate - a.rate || a.forum_id.localeCompare(b.forum_id),
  );
}

/**
 * Client-side re-flagging when the threshold slider moves, matching the
 * server rule: a forum is flagged iff rate >= tau_forum.
 */
export function recomputeFlags(
  rows: readonly FlagRow[],
  tauForum: number,
): FlagRow[] {
  return sortByRateDesc(rows).map((row) => ({
    ...row,
    flagged: row.rate >= tauForum,
    tau_forum: tauForum,
  }));
}

export function flaggedForums(rows: readonly FlagRow[]): string[] {
  return rows.filter((row) => row.flagged).map((row) => row.forum_id);
}
