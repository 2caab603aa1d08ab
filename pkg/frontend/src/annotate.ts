import type { ApiClient } from "./api.js";
import type { Label, Posting } from "./types.js";

/**
 * One-posting-at-a-time annotation flow. The server is the source of truth:
 * `load()` fetches only still-open postings, so a reload never re-shows
 * anything already annotated. A failed submit keeps the selection local so
 * the user can retry.
 */
export class AnnotateFlow {
  private postings: Posting[] = [];
  private index = 0;
  scale: Record<string, string> = {};
  done = 0;
  total = 0;
  selection: Label | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    const assignments = await this.api.assignments();
    this.postings = assignments.postings;
    this.scale = assignments.scale;
    this.index = 0;
    this.done = 0;
    this.total = this.postings.length;
    this.selection = null;
  }

  get current(): Posting | null {
    return this.postings[this.index] ?? null;
  }

  get progress(): { done: number; total: number } {
    return { done: this.done, total: this.total };
  }

  select(label: number): void {
    if (!Number.isInteger(label) || label < 0 || label > 4) {
      throw new RangeError(`label must be an integer in 0..4, got ${label}`);
    }
    this.selection = label as Label;
  }

  get canSubmit(): boolean {
    return this.selection !== null && this.current !== null;
  }

  async submit(): Promise<void> {
    const posting = this.current;
    if (posting === null || this.selection === null) {
      throw new Error("nothing selected");
    }
    // may throw (network, 4xx); selection stays put so the user can retry
    await this.api.submitAnnotation(posting.posting_id, this.selection);
    this.done += 1;
    this.index += 1;
    this.selection = null;
  }
}
