"""Corpus store: postings, annotators, rounds and annotations.

Persistence is a single directory of JSON-lines tables, rewritten atomically
on every mutation. At campaign scale (tens of thousands of rows) this is
cheap and keeps the files diff-able. A store created without a directory is
purely in-memory, which the test suite and simulations use.

Concurrency: one handle, one writer. All mutating methods take the handle
lock; reads return snapshots (copied lists), so readers never observe a
half-applied mutation.
"""

from __future__ import annotations

import json
import os
import random
import threading
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional

from .labels import check_label

SCHEMA_VERSION = 1

SOURCE_TAGS = frozenset(
    {
        "S1_reported_sexism_keyword",
        "S2_reported_other",
        "S3_random_sample",
        "S4_preclassified_from_S2",
        "S5_preclassified_hot_forums",
    }
)

ANNOTATOR_ROLES = frozenset({"moderator", "nlp_expert"})


class StoreError(Exception):
    """Base class for store failures."""


class ValidationError(StoreError):
    """A record failed validation (bad field, bad reference, bad label)."""


class DuplicateError(StoreError):
    """An id collided with an existing record."""


class NotFoundError(StoreError):
    """A referenced id does not exist."""


@dataclass(frozen=True)
class Posting:
    id: str
    forum_id: str
    text: str
    source_tag: str
    preclass_prob: Optional[float] = None

    def validate(self) -> "Posting":
        if not self.id:
            raise ValidationError("posting id must be non-empty")
        if not self.text or not self.text.strip():
            raise ValidationError(f"posting {self.id!r}: text is empty")
        if self.source_tag not in SOURCE_TAGS:
            raise ValidationError(
                f"posting {self.id!r}: unknown source_tag {self.source_tag!r}"
            )
        if self.preclass_prob is not None and not (0.0 <= self.preclass_prob <= 1.0):
            raise ValidationError(
                f"posting {self.id!r}: preclass_prob {self.preclass_prob} outside [0,1]"
            )
        return self


@dataclass(frozen=True)
class Annotator:
    id: str
    display_name: str
    role: str
    active: bool = True

    def validate(self) -> "Annotator":
        if not self.id:
            raise ValidationError("annotator id must be non-empty")
        if self.role not in ANNOTATOR_ROLES:
            raise ValidationError(f"annotator {self.id!r}: unknown role {self.role!r}")
        return self


@dataclass(frozen=True)
class Annotation:
    posting_id: str
    annotator_id: str
    round_id: str
    label: int
    submitted_at: str = ""


@dataclass
class Round:
    id: str
    kind: str  # "calibration" | "regular"
    posting_ids: list[str] = field(default_factory=list)
    annotator_ids: set[str] = field(default_factory=set)
    status: str = "open"  # "open" | "complete"


def _posting_from_record(rec: dict, lineno: int | None = None) -> Posting:
    where = f" (line {lineno})" if lineno is not None else ""
    if not isinstance(rec, dict):
        raise ValidationError(f"record is not an object{where}")
    try:
        posting = Posting(
            id=str(rec["id"]),
            forum_id=str(rec.get("forum_id", "")),
            text=rec["text"],
            source_tag=rec["source_tag"],
            preclass_prob=rec.get("preclass_prob"),
        )
    except KeyError as exc:
        raise ValidationError(f"record missing field {exc.args[0]!r}{where}") from None
    try:
        return posting.validate()
    except ValidationError as exc:
        raise ValidationError(f"{exc}{where}") from None


def read_postings_jsonl(path) -> list[Posting]:
    """Parse an ingestion file: one posting object per line, UTF-8."""
    postings = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"bad JSON on line {lineno}: {exc}") from None
            postings.append(_posting_from_record(rec, lineno))
    return postings


class CorpusStore:
    """Single-writer store over postings/annotators/rounds/annotations."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self._lock = threading.RLock()
        self.directory = str(directory) if directory is not None else None
        self.postings: dict[str, Posting] = {}
        self.annotators: dict[str, Annotator] = {}
        self.rounds: dict[str, Round] = {}
        # keyed by (posting_id, annotator_id); at most one annotation per key
        self.annotations: dict[tuple[str, str], Annotation] = {}
        if self.directory is not None:
            os.makedirs(self.directory, exist_ok=True)
            self._load()

    # -- persistence ---------------------------------------------------

    def _table_path(self, name: str) -> str:
        return os.path.join(self.directory, f"{name}.jsonl")

    def _load(self) -> None:
        meta_path = os.path.join(self.directory, "meta.json")
        if os.path.exists(meta_path):
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
            if meta.get("schema_version") != SCHEMA_VERSION:
                raise StoreError(
                    f"store schema version {meta.get('schema_version')} not supported"
                )
        for name, loader in (
            ("postings", self._load_posting),
            ("annotators", self._load_annotator),
            ("rounds", self._load_round),
            ("annotations", self._load_annotation),
        ):
            path = self._table_path(name)
            if not os.path.exists(path):
                continue
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        loader(json.loads(line))

    def _load_posting(self, rec: dict) -> None:
        p = Posting(**rec)
        self.postings[p.id] = p

    def _load_annotator(self, rec: dict) -> None:
        a = Annotator(**rec)
        self.annotators[a.id] = a

    def _load_round(self, rec: dict) -> None:
        r = Round(
            id=rec["id"],
            kind=rec["kind"],
            posting_ids=list(rec["posting_ids"]),
            annotator_ids=set(rec["annotator_ids"]),
            status=rec["status"],
        )
        self.rounds[r.id] = r

    def _load_annotation(self, rec: dict) -> None:
        ann = Annotation(**rec)
        self.annotations[(ann.posting_id, ann.annotator_id)] = ann

    def _atomic_write(self, path: str, lines: Iterable[str]) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)

    def flush(self) -> None:
        """Rewrite every table. No-op for in-memory stores."""
        if self.directory is None:
            return
        with self._lock:
            with open(os.path.join(self.directory, "meta.json"), "w", encoding="utf-8") as fh:
                json.dump({"schema_version": SCHEMA_VERSION}, fh)
            self._atomic_write(
                self._table_path("postings"),
                (json.dumps(asdict(p), ensure_ascii=False) for p in self.postings.values()),
            )
            self._atomic_write(
                self._table_path("annotators"),
                (json.dumps(asdict(a), ensure_ascii=False) for a in self.annotators.values()),
            )
            self._atomic_write(
                self._table_path("rounds"),
                (
                    json.dumps(
                        {
                            "id": r.id,
                            "kind": r.kind,
                            "posting_ids": r.posting_ids,
                            "annotator_ids": sorted(r.annotator_ids),
                            "status": r.status,
                        }
                    )
                    for r in self.rounds.values()
                ),
            )
            self._atomic_write(
                self._table_path("annotations"),
                (json.dumps(asdict(a), ensure_ascii=False) for a in self.annotations.values()),
            )

    # -- postings ------------------------------------------------------

    def ingest_postings(self, records: Iterable[Posting | dict], dedupe: bool = False) -> int:
        """Add postings; returns the number actually ingested.

        With dedupe=True, postings whose id already exists are silently
        skipped; otherwise a duplicate id is an error.
        """
        parsed: list[Posting] = []
        for i, rec in enumerate(records):
            if isinstance(rec, Posting):
                rec.validate()
                parsed.append(rec)
            else:
                parsed.append(_posting_from_record(rec, i + 1))
        with self._lock:
            seen_new: set[str] = set()
            for p in parsed:
                if p.id in self.postings or p.id in seen_new:
                    if dedupe:
                        continue
                    raise DuplicateError(f"posting id {p.id!r} already exists")
                seen_new.add(p.id)
            count = 0
            for p in parsed:
                if p.id in self.postings:
                    continue
                self.postings[p.id] = p
                count += 1
            self.flush()
            return count

    def add_annotators(self, annotators: Iterable[Annotator]) -> int:
        with self._lock:
            count = 0
            for a in annotators:
                a.validate()
                if a.id in self.annotators:
                    raise DuplicateError(f"annotator id {a.id!r} already exists")
                self.annotators[a.id] = a
                count += 1
            self.flush()
            return count

    def set_annotator_active(self, annotator_id: str, active: bool) -> None:
        with self._lock:
            a = self.annotators.get(annotator_id)
            if a is None:
                raise NotFoundError(f"unknown annotator {annotator_id!r}")
            self.annotators[annotator_id] = Annotator(a.id, a.display_name, a.role, active)
            self.flush()

    def active_annotators(self) -> list[Annotator]:
        with self._lock:
            return [a for a in self.annotators.values() if a.active]

    # -- rounds / annotations -----------------------------------------

    def assigned_posting_ids(self) -> set[str]:
        with self._lock:
            out: set[str] = set()
            for r in self.rounds.values():
                out.update(r.posting_ids)
            return out

    def add_round(self, rnd: Round) -> Round:
        with self._lock:
            if rnd.id in self.rounds:
                raise DuplicateError(f"round id {rnd.id!r} already exists")
            assigned = self.assigned_posting_ids()
            for pid in rnd.posting_ids:
                if pid not in self.postings:
                    raise NotFoundError(f"unknown posting {pid!r}")
                if pid in assigned:
                    raise ValidationError(f"posting {pid!r} already belongs to a round")
            if len(set(rnd.posting_ids)) != len(rnd.posting_ids):
                raise ValidationError("round posting_ids contain duplicates")
            for aid in rnd.annotator_ids:
                if aid not in self.annotators:
                    raise NotFoundError(f"unknown annotator {aid!r}")
            self.rounds[rnd.id] = rnd
            self.flush()
            return rnd

    def upsert_annotations(self, annotations: Iterable[Annotation]) -> int:
        """Insert or replace annotations; returns how many were applied."""
        with self._lock:
            count = 0
            for ann in annotations:
                check_label(ann.label)
                if ann.posting_id not in self.postings:
                    raise NotFoundError(f"unknown posting {ann.posting_id!r}")
                if ann.annotator_id not in self.annotators:
                    raise NotFoundError(f"unknown annotator {ann.annotator_id!r}")
                if ann.round_id not in self.rounds:
                    raise NotFoundError(f"unknown round {ann.round_id!r}")
                self.annotations[(ann.posting_id, ann.annotator_id)] = ann
                count += 1
            self.flush()
            return count

    def annotations_for_posting(self, posting_id: str) -> list[Annotation]:
        with self._lock:
            return [a for a in self.annotations.values() if a.posting_id == posting_id]

    def labels_by_posting(self) -> dict[str, list[int]]:
        """posting_id -> list of assigned labels, over all annotations."""
        with self._lock:
            out: dict[str, list[int]] = {}
            for ann in self.annotations.values():
                out.setdefault(ann.posting_id, []).append(ann.label)
            return out

    def annotated_posting_ids(self) -> set[str]:
        with self._lock:
            return {pid for (pid, _aid) in self.annotations}

    # -- sampling ------------------------------------------------------

    def sample_random(self, n: int, seed: int) -> list[str]:
        """Uniform sample without replacement from unannotated, unassigned postings."""
        with self._lock:
            taken = self.assigned_posting_ids() | self.annotated_posting_ids()
            candidates = sorted(pid for pid in self.postings if pid not in taken)
        if n > len(candidates):
            raise ValidationError(
                f"cannot sample {n} postings, only {len(candidates)} available"
            )
        return random.Random(seed).sample(candidates, n)

    def sample_preclassified(self, mode: str, n: int, epsilon: float = 0.1) -> list[str]:
        """Pick postings by pre-classifier probability.

        top_positive: n postings with the largest probability.
        near_boundary: n postings with probability closest to 0.5,
        restricted to |p - 0.5| <= epsilon. Ties break on posting id.
        """
        with self._lock:
            taken = self.assigned_posting_ids() | self.annotated_posting_ids()
            candidates = [
                p
                for p in self.postings.values()
                if p.preclass_prob is not None and p.id not in taken
            ]
        if not candidates:
            raise ValidationError("no unassigned postings with a pre-classifier probability")
        if mode == "top_positive":
            ranked = sorted(candidates, key=lambda p: (-p.preclass_prob, p.id))
        elif mode == "near_boundary":
            ranked = sorted(
                (p for p in candidates if abs(p.preclass_prob - 0.5) <= epsilon),
                key=lambda p: (abs(p.preclass_prob - 0.5), p.id),
            )
        else:
            raise ValidationError(f"unknown sampling mode {mode!r}")
        return [p.id for p in ranked[:n]]

    # -- audit ---------------------------------------------------------

    def audit(self) -> list[str]:
        """Referential-integrity check; returns a list of problems (empty = clean)."""
        problems = []
        with self._lock:
            for (pid, aid), ann in self.annotations.items():
                if pid not in self.postings:
                    problems.append(f"annotation references missing posting {pid!r}")
                if aid not in self.annotators:
                    problems.append(f"annotation references missing annotator {aid!r}")
                if ann.round_id not in self.rounds:
                    problems.append(f"annotation references missing round {ann.round_id!r}")
            seen: set[str] = set()
            for r in self.rounds.values():
                for pid in r.posting_ids:
                    if pid not in self.postings:
                        problems.append(f"round {r.id!r} references missing posting {pid!r}")
                    if pid in seen:
                        problems.append(f"posting {pid!r} appears in more than one round")
                    seen.add(pid)
        return problems
