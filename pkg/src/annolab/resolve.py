"""Gold-label resolution and stratified cross-validation folds.

Two resolution strategies:
  most_frequent — the most frequently assigned label, ties broken toward
  the highest label (which subsumes the all-distinct fallback to the max);
  max — the highest label any annotator assigned.
"""

from __future__ import annotations

import csv
import json
import os
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .labels import binarize, check_label
from .store import CorpusStore, NotFoundError, ValidationError

STRATEGIES = ("most_frequent", "max")


@dataclass(frozen=True)
class GoldRecord:
    posting_id: str
    gold_label: int
    gold_binary: int
    strategy: str


@dataclass
class FoldPlan:
    k: int
    seed: int
    assignment: dict[str, int]  # posting_id -> fold index
    dev_assignment: dict[int, set[str]]  # fold index -> dev posting ids of its training split
    warnings: list[str] = field(default_factory=list)

    def fold_ids(self, fold: int) -> list[str]:
        return sorted(pid for pid, f in self.assignment.items() if f == fold)

    def split(self, fold: int) -> tuple[list[str], list[str], list[str]]:
        """(train, dev, test) posting ids for one fold."""
        test = self.fold_ids(fold)
        dev = sorted(self.dev_assignment.get(fold, set()))
        dev_set = set(dev)
        train = sorted(
            pid for pid, f in self.assignment.items() if f != fold and pid not in dev_set
        )
        return train, dev, test


def resolve_most_frequent(labels: Iterable[int]) -> int:
    labels = [check_label(l) for l in labels]
    if not labels:
        raise ValidationError("cannot resolve an empty label multiset")
    counts = Counter(labels)
    best = max(counts.values())
    return max(l for l, c in counts.items() if c == best)


def resolve_max(labels: Iterable[int]) -> int:
    labels = [check_label(l) for l in labels]
    if not labels:
        raise ValidationError("cannot resolve an empty label multiset")
    return max(labels)


def binary_target(
    labels: Iterable[int], strategy: str, resolve_first: bool = False
) -> int:
    """Binary training target.

    max: positive iff any annotator assigned a positive label.
    most_frequent: binarize the multiset first, then majority with ties
    broken toward positive; with resolve_first=True the alternative
    binarize(resolve_most_frequent(...)) is used instead.
    """
    labels = list(labels)
    if not labels:
        raise ValidationError("cannot resolve an empty label multiset")
    if strategy == "max":
        return binarize(resolve_max(labels))
    if strategy == "most_frequent":
        if resolve_first:
            return binarize(resolve_most_frequent(labels))
        ones = sum(binarize(l) for l in labels)
        return 1 if ones * 2 >= len(labels) else 0
    raise ValidationError(f"unknown strategy {strategy!r}")


def build_gold(
    store: CorpusStore, strategy: str, resolve_first: bool = False
) -> list[GoldRecord]:
    """One GoldRecord per annotated posting, under the given strategy."""
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}")
    resolver = resolve_max if strategy == "max" else resolve_most_frequent
    records = []
    for pid, labels in sorted(store.labels_by_posting().items()):
        records.append(
            GoldRecord(
                posting_id=pid,
                gold_label=resolver(labels),
                gold_binary=binary_target(labels, strategy, resolve_first),
                strategy=strategy,
            )
        )
    return records


def stratified_folds(
    records: list[GoldRecord], k: int = 5, dev_frac: float = 0.10, seed: int = 0
) -> FoldPlan:
    """Class-stratified k folds with a class-stratified dev split per fold.

    Within each class the records are shuffled (seeded) and dealt
    round-robin, which keeps per-fold class counts within 1 of the
    proportional share. Deterministic for a given seed.
    """
    if k < 2:
        raise ValidationError("k must be at least 2")
    if not records:
        raise ValidationError("no records to split")
    by_class: dict[int, list[str]] = {}
    for rec in records:
        by_class.setdefault(rec.gold_label, []).append(rec.posting_id)
    rng = random.Random(seed)
    assignment: dict[str, int] = {}
    warnings = []
    for cls in sorted(by_class):
        ids = sorted(by_class[cls])
        if len(ids) < k:
            warnings.append(
                f"class {cls} has only {len(ids)} records for {k} folds; some folds lack it"
            )
        rng.shuffle(ids)
        for i, pid in enumerate(ids):
            assignment[pid] = i % k
    dev_assignment: dict[int, set[str]] = {}
    for fold in range(k):
        dev: set[str] = set()
        for cls in sorted(by_class):
            train_ids = sorted(
                pid for pid in by_class[cls] if assignment[pid] != fold
            )
            n_dev = round(dev_frac * len(train_ids))
            fold_rng = random.Random((seed, fold, cls).__hash__())
            fold_rng.shuffle(train_ids)
            dev.update(train_ids[:n_dev])
        dev_assignment[fold] = dev
    return FoldPlan(
        k=k, seed=seed, assignment=assignment, dev_assignment=dev_assignment, warnings=warnings
    )


GOLD_COLUMNS = ["posting_id", "text", "gold_label", "gold_binary"]


def export_training_set(
    store: CorpusStore,
    records: list[GoldRecord],
    plan: FoldPlan,
    out_dir: str,
    fmt: str = "tsv",
) -> list[str]:
    """Write fold{i}.{train,dev,test}.{tsv,jsonl} files; returns the paths."""
    if fmt not in ("tsv", "jsonl"):
        raise ValidationError(f"unknown format {fmt!r}")
    by_id = {rec.posting_id: rec for rec in records}
    missing = [pid for pid in plan.assignment if pid not in by_id]
    if missing:
        raise ValidationError(f"fold plan references unknown records: {missing[:3]}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for fold in range(plan.k):
        train, dev, test = plan.split(fold)
        for part, ids in (("train", train), ("dev", dev), ("test", test)):
            path = os.path.join(out_dir, f"fold{fold}.{part}.{fmt}")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                if fmt == "tsv":
                    writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
                    writer.writerow(GOLD_COLUMNS)
                for pid in ids:
                    rec = by_id[pid]
                    posting = store.postings.get(pid)
                    if posting is None:
                        raise NotFoundError(f"posting {pid!r} missing from store")
                    if fmt == "tsv":
                        writer.writerow(
                            [pid, posting.text, rec.gold_label, rec.gold_binary]
                        )
                    else:
                        fh.write(
                            json.dumps(
                                {
                                    "posting_id": pid,
                                    "text": posting.text,
                                    "gold_label": rec.gold_label,
                                    "gold_binary": rec.gold_binary,
                                },
                                ensure_ascii=False,
                            )
                            + "\n"
                        )
            paths.append(path)
    return paths


def read_gold_tsv(path: str, strategy: str = "most_frequent") -> list[GoldRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        for row in reader:
            records.append(
                GoldRecord(
                    posting_id=row["posting_id"],
                    gold_label=int(row["gold_label"]),
                    gold_binary=int(row["gold_binary"]),
                    strategy=strategy,
                )
            )
    return records
