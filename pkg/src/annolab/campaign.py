"""Annotation rounds: creation, batch export/import, disagreement ranking.

Rounds hold 100 postings by default. The first (calibration) round goes to
every annotator; regular rounds go to a random selection of k annotators
(default 3) drawn from whoever is available.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from itertools import combinations
from typing import Iterable, TextIO

from .labels import check_label
from .store import Annotation, CorpusStore, Round, ValidationError, NotFoundError

DEFAULT_ROUND_SIZE = 100
DEFAULT_ANNOTATORS_PER_ROUND = 3

BATCH_HEADER = ["posting_id", "text", "label"]


@dataclass(frozen=True)
class DisagreementRecord:
    posting_id: str
    labels: tuple[int, ...]
    score: float


def label_distance(a: int, b: int) -> float:
    """Pairwise label distance: presence/absence disagreement counts as the
    maximum distance 4; between positive labels it is the plain difference."""
    check_label(a)
    check_label(b)
    if a == b:
        return 0.0
    if a == 0 or b == 0:
        return 4.0
    return float(abs(a - b))


def disagreement_score(labels: Iterable[int]) -> float:
    """Mean pairwise distance over all unordered label pairs."""
    labels = list(labels)
    if len(labels) < 2:
        raise ValidationError("disagreement score needs at least 2 labels")
    pairs = list(combinations(labels, 2))
    return sum(label_distance(a, b) for a, b in pairs) / len(pairs)


def _new_round_id(store: CorpusStore) -> str:
    return f"round-{len(store.rounds) + 1:04d}"


def create_calibration_round(
    store: CorpusStore, posting_ids: list[str], annotator_ids: Iterable[str]
) -> Round:
    annotator_ids = set(annotator_ids)
    if not annotator_ids:
        raise ValidationError("calibration round needs at least one annotator")
    rnd = Round(
        id=_new_round_id(store),
        kind="calibration",
        posting_ids=list(posting_ids),
        annotator_ids=annotator_ids,
    )
    return store.add_round(rnd)


def create_round(
    store: CorpusStore,
    posting_ids: list[str],
    available: Iterable[str],
    k: int = DEFAULT_ANNOTATORS_PER_ROUND,
    seed: int = 0,
) -> Round:
    """Regular round: k annotators drawn uniformly without replacement."""
    available = sorted(set(available))
    if len(available) < k:
        raise ValidationError(
            f"need {k} annotators but only {len(available)} available"
        )
    chosen = set(random.Random(seed).sample(available, k))
    rnd = Round(
        id=_new_round_id(store),
        kind="regular",
        posting_ids=list(posting_ids),
        annotator_ids=chosen,
    )
    return store.add_round(rnd)


def rank_disagreements(store: CorpusStore, round_id: str) -> list[DisagreementRecord]:
    """Postings of the round with >=2 annotations, highest disagreement first.

    Ties break on posting id so the ranking is stable.
    """
    rnd = store.rounds.get(round_id)
    if rnd is None:
        raise NotFoundError(f"unknown round {round_id!r}")
    by_posting = store.labels_by_posting()
    records = []
    for pid in rnd.posting_ids:
        labels = by_posting.get(pid, [])
        if len(labels) < 2:
            continue
        records.append(
            DisagreementRecord(pid, tuple(sorted(labels)), disagreement_score(labels))
        )
    records.sort(key=lambda r: (-r.score, r.posting_id))
    return records


def export_batch(store: CorpusStore, round_id: str, annotator_id: str, out: TextIO) -> int:
    """Write the annotator's batch CSV (posting_id,text,label) to `out`.

    The label column is left empty for the annotator to fill. Returns the
    number of rows written.
    """
    rnd = store.rounds.get(round_id)
    if rnd is None:
        raise NotFoundError(f"unknown round {round_id!r}")
    if annotator_id not in rnd.annotator_ids:
        raise ValidationError(
            f"annotator {annotator_id!r} is not assigned to round {round_id!r}"
        )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BATCH_HEADER)
    for pid in rnd.posting_ids:
        writer.writerow([pid, store.postings[pid].text, ""])
    return len(rnd.posting_ids)


def export_batch_string(store: CorpusStore, round_id: str, annotator_id: str) -> str:
    buf = io.StringIO()
    export_batch(store, round_id, annotator_id, buf)
    return buf.getvalue()


def import_batch(
    store: CorpusStore, infile: TextIO, annotator_id: str, round_id: str
) -> list[Annotation]:
    """Read back a filled batch CSV and upsert one annotation per row.

    Re-importing the same file is idempotent. Malformed rows are reported
    with their row number (header = row 1).
    """
    rnd = store.rounds.get(round_id)
    if rnd is None:
        raise NotFoundError(f"unknown round {round_id!r}")
    if annotator_id not in rnd.annotator_ids:
        raise ValidationError(
            f"annotator {annotator_id!r} is not assigned to round {round_id!r}"
        )
    reader = csv.reader(infile)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != BATCH_HEADER:
        raise ValidationError(f"bad batch header, expected {','.join(BATCH_HEADER)}")
    round_postings = set(rnd.posting_ids)
    now = datetime.now(timezone.utc).isoformat()
    annotations = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValidationError(f"row {rowno}: expected 3 columns, got {len(row)}")
        pid, _text, label_str = row
        if pid not in round_postings:
            raise ValidationError(f"row {rowno}: posting {pid!r} not in round {round_id!r}")
        label_str = label_str.strip()
        if not label_str:
            raise ValidationError(f"row {rowno}: missing label")
        try:
            label = int(label_str)
            check_label(label)
        except ValueError:
            raise ValidationError(
                f"row {rowno}: label {label_str!r} is not an integer in 0..4"
            ) from None
        annotations.append(
            Annotation(
                posting_id=pid,
                annotator_id=annotator_id,
                round_id=round_id,
                label=label,
                submitted_at=now,
            )
        )
    store.upsert_annotations(annotations)
    return annotations
