export type Label = 0 | 1 | 2 | 3 | 4;

export const LABELS: readonly Label[] = [0, 1, 2, 3, 4];

export interface Posting {
  posting_id: string;
  round_id: string;
  text: string;
}

export interface Assignments {
  annotator_id: string;
  scale: Record<string, string>;
  postings: Posting[];
}

export interface AnnotationEcho {
  posting_id: string;
  annotator_id: string;
  round_id: string;
  label: number;
}

export interface FlagRow {
  forum_id: string;
  n: number;
  rate: number;
  flagged: boolean;
  tau_post: number;
  tau_forum: number;
}

export interface DisagreementRow {
  posting_id: string;
  labels: number[];
  score: number;
}

export interface Stats {
  n_postings: number;
  n_rounds: number;
  n_annotations: number;
  agreement: Record<string, unknown> | null;
  open_assignments: Record<string, number>;
}
