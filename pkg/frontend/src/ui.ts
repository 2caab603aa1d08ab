import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import { AnnotateFlow } from "./annotate.js";
import { flaggedForums, recomputeFlags } from "./flags.js";
import { loadReview } from "./review.js";
import type { FlagRow } from "./types.js";
import { LABELS } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

/**
 * Annotation view: one posting at a time, five label buttons mirroring the
 * scale captions, submit disabled until a label is selected.
 */
export function renderAnnotate(root: HTMLElement, flow: AnnotateFlow): void {
  root.replaceChildren();
  const posting = flow.current;
  const progress = el(
    "p",
    "progress",
    `${flow.progress.done} / ${flow.progress.total} annotated`,
  );
  root.append(progress);
  if (posting === null) {
    root.append(el("p", "empty", "No open assignments."));
    return;
  }
  root.append(el("blockquote", "posting-text", posting.text));

  const selector = el("div", "label-selector");
  for (const label of LABELS) {
    const caption = flow.scale[String(label)] ?? String(label);
    const button = el("button", "label-option", `${label} — ${caption}`);
    button.dataset.label = String(label);
    if (flow.selection === label) button.classList.add("selected");
    button.addEventListener("click", () => {
      flow.select(label);
      renderAnnotate(root, flow);
    });
    selector.append(button);
  }
  root.append(selector);

  const submit = el("button", "submit", "Submit");
  submit.disabled = !flow.canSubmit;
  submit.addEventListener("click", async () => {
    if (!flow.canSubmit) return;
    try {
      await flow.submit();
    } catch (error) {
      // selection is kept; show the problem and let the user retry
      const message =
        error instanceof ApiError && error.status === 422
          ? error.message
          : "Submission failed — check your connection and retry.";
      renderAnnotate(root, flow);
      root.append(el("p", "error", message));
      return;
    }
    renderAnnotate(root, flow);
  });
  root.append(submit);
}

/**
 * Flag dashboard: forum rows sorted by rate descending, a tau_forum slider
 * that re-flags client-side, and an Apply button that re-fetches from the
 * server at the chosen threshold.
 */
export function renderFlagDashboard(
  root: HTMLElement,
  api: ApiClient,
  rows: FlagRow[],
  tauForum: number,
): void {
  root.replaceChildren();
  if (rows.length === 0) {
    root.append(el("p", "empty", "No classifier scores loaded."));
    return;
  }
  const view = recomputeFlags(rows, tauForum);

  const slider = el("input", "tau-slider") as HTMLInputElement;
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.01";
  slider.value = String(tauForum);
  slider.addEventListener("input", () => {
    renderFlagDashboard(root, api, rows, Number(slider.value));
  });
  const sliderLabel = el("label", "tau-label", `tau_forum = ${tauForum.toFixed(2)}`);
  sliderLabel.append(slider);

  const apply = el("button", "apply", "Apply");
  apply.addEventListener("click", async () => {
    const fresh = await api.flags(tauForum);
    renderFlagDashboard(root, api, fresh, tauForum);
  });

  const table = el("table", "flags");
  const head = el("tr");
  for (const title of ["forum", "postings", "rate", "flagged"]) {
    head.append(el("th", "", title));
  }
  table.append(head);
  for (const row of view) {
    const tr = el("tr", row.flagged ? "flagged" : "");
    tr.dataset.forum = row.forum_id;
    tr.append(
      el("td", "", row.forum_id),
      el("td", "", String(row.n)),
      el("td", "", row.rate.toFixed(2)),
      el("td", "", row.flagged ? "yes" : "no"),
    );
    table.append(tr);
  }

  const summary = el(
    "p",
    "summary",
    `${flaggedForums(view).length} of ${view.length} forums flagged`,
  );
  root.append(sliderLabel, apply, table, summary);
}

/** Disagreement review: ranked rows with a per-label histogram each. */
export async function renderReview(
  root: HTMLElement,
  api: ApiClient,
  roundId: string,
): Promise<void> {
  root.replaceChildren();
  let rows;
  try {
    rows = await loadReview(api, roundId);
  } catch (error) {
    if (error instanceof ApiError && error.status === 403) {
      root.append(el("p", "error", "Access denied: coordinator role required."));
      return;
    }
    throw error;
  }
  const list = el("ol", "disagreements");
  for (const row of rows) {
    const item = el("li", "", `${row.posting_id} — score ${row.score.toFixed(2)}`);
    const bars = LABELS.map((l) => `${l}:${row.histogram[l] ?? 0}`).join(" ");
    item.append(el("span", "histogram", ` [${bars}]`));
    list.append(item);
  }
  root.append(list);
}
