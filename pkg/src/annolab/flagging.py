"""Per-forum misogyny rates from classifier scores, and flag reports.

Scores come from files or an external scorer; this module never looks at
text. A posting counts as positive when its probability reaches tau_post
(default 0.5, the binary head's decode convention); a forum is flagged when
its positive rate reaches tau_forum (default 0.10).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Iterable, Optional

DEFAULT_TAU_POST = 0.5
DEFAULT_TAU_FORUM = 0.10


class ScoreError(Exception):
    pass


@dataclass(frozen=True)
class ScoreRecord:
    posting_id: str
    forum_id: str
    p_positive: float

    def validate(self) -> "ScoreRecord":
        if not self.posting_id or not self.forum_id:
            raise ScoreError("posting_id and forum_id must be non-empty")
        if not (0.0 <= self.p_positive <= 1.0):
            raise ScoreError(
                f"posting {self.posting_id!r}: p_positive {self.p_positive} outside [0,1]"
            )
        return self


@dataclass(frozen=True)
class ForumReport:
    forum_id: str
    n_postings: int
    positive_rate: float
    flagged: bool
    tau_post: float
    tau_forum: float


class ScoreBoard:
    """Upsert-by-posting-id store of classifier scores."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._scores: dict[str, ScoreRecord] = {}
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            rec = ScoreRecord(**json.loads(line)).validate()
                            self._scores[rec.posting_id] = rec
            except FileNotFoundError:
                pass

    def ingest(self, records: Iterable[ScoreRecord | dict]) -> int:
        count = 0
        for rec in records:
            if isinstance(rec, dict):
                rec = ScoreRecord(
                    posting_id=str(rec["posting_id"]),
                    forum_id=str(rec["forum_id"]),
                    p_positive=float(rec["p_positive"]),
                )
            rec.validate()
            self._scores[rec.posting_id] = rec
            count += 1
        if self.path is not None:
            with open(self.path, "w", encoding="utf-8") as fh:
                for rec in self._scores.values():
                    fh.write(json.dumps(asdict(rec)) + "\n")
        return count

    def __len__(self) -> int:
        return len(self._scores)

    def forum_rates(self, tau_post: float = DEFAULT_TAU_POST) -> list[tuple[str, int, float]]:
        """(forum_id, n, positive rate) per forum with at least one score."""
        totals: dict[str, int] = {}
        positive: dict[str, int] = {}
        for rec in self._scores.values():
            totals[rec.forum_id] = totals.get(rec.forum_id, 0) + 1
            if rec.p_positive >= tau_post:
                positive[rec.forum_id] = positive.get(rec.forum_id, 0) + 1
        return [
            (forum, n, positive.get(forum, 0) / n)
            for forum, n in sorted(totals.items())
        ]

    def flag_forums(
        self,
        tau_post: float = DEFAULT_TAU_POST,
        tau_forum: float = DEFAULT_TAU_FORUM,
    ) -> list[ForumReport]:
        """Flag reports sorted by rate descending, ties on forum id."""
        reports = [
            ForumReport(
                forum_id=forum,
                n_postings=n,
                positive_rate=rate,
                flagged=rate >= tau_forum,
                tau_post=tau_post,
                tau_forum=tau_forum,
            )
            for forum, n, rate in self.forum_rates(tau_post)
        ]
        reports.sort(key=lambda r: (-r.positive_rate, r.forum_id))
        return reports


def read_scores_jsonl(path: str) -> list[ScoreRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                records.append(
                    ScoreRecord(
                        posting_id=str(rec["posting_id"]),
                        forum_id=str(rec["forum_id"]),
                        p_positive=float(rec["p_positive"]),
                    ).validate()
                )
            except (KeyError, ValueError, ScoreError) as exc:
                raise ScoreError(f"line {lineno}: {exc}") from None
    return records


def reports_to_tsv(reports: list[ForumReport]) -> str:
    lines = ["forum_id\tn\trate\tflagged"]
    for r in reports:
        lines.append(f"{r.forum_id}\t{r.n_postings}\t{r.positive_rate:.6g}\t{str(r.flagged).lower()}")
    return "\n".join(lines) + "\n"


def reports_to_json(reports: list[ForumReport]) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2)
