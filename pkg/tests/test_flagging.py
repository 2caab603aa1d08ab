import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annolab.flagging import (
    ScoreBoard,
    ScoreError,
    ScoreRecord,
    read_scores_jsonl,
    reports_to_json,
    reports_to_tsv,
)

from conftest import FORUM_RATES


def paper_rate_board():
    """Six forums whose positive rates reproduce the reported values.

    Each forum gets 100 postings; rate r means exactly 100*r of them score
    above the posting threshold.
    """
    board = ScoreBoard()
    records = []
    for forum, rate in FORUM_RATES.items():
        positives = round(rate * 100)
        for i in range(100):
            records.append(
                ScoreRecord(
                    posting_id=f"{forum}-p{i:03d}",
                    forum_id=forum,
                    p_positive=0.9 if i < positives else 0.1,
                )
            )
    board.ingest(records)
    return board


class TestIngest:
    def test_count(self):
        board = ScoreBoard()
        assert board.ingest(
            [ScoreRecord(f"p{i}", "f", 0.5) for i in range(10)]
        ) == 10
        assert len(board) == 10

    def test_out_of_range(self):
        board = ScoreBoard()
        with pytest.raises(ScoreError):
            board.ingest([ScoreRecord("p1", "f", -0.1)])

    def test_upsert_replaces(self):
        board = ScoreBoard()
        board.ingest([ScoreRecord("p1", "f", 0.2)])
        board.ingest([ScoreRecord("p1", "f", 0.9)])
        assert len(board) == 1
        assert board.forum_rates()[0][2] == 1.0


class TestForumRates:
    def test_hand_count(self):
        board = ScoreBoard()
        board.ingest(
            [ScoreRecord(f"p{i}", "f", 0.8 if i < 3 else 0.2) for i in range(10)]
        )
        assert board.forum_rates(tau_post=0.5) == [("f", 10, 0.3)]

    def test_all_zero(self):
        board = ScoreBoard()
        board.ingest([ScoreRecord(f"p{i}", "f", 0.0) for i in range(5)])
        assert board.forum_rates()[0][2] == 0.0

    def test_paper_rate_fixture(self):
        rates = {f: r for f, _n, r in paper_rate_board().forum_rates()}
        assert rates == pytest.approx(FORUM_RATES)


class TestFlagging:
    def test_two_groups_at_default_threshold(self):
        reports = paper_rate_board().flag_forums(tau_forum=0.10)
        flagged = [r.forum_id for r in reports if r.flagged]
        assert [r.positive_rate for r in reports[:3]] == [0.27, 0.23, 0.17]
        assert set(flagged) == {"forum-1", "forum-2", "forum-3"}

    def test_zero_threshold_flags_all(self):
        reports = paper_rate_board().flag_forums(tau_forum=0.0)
        assert all(r.flagged for r in reports)

    def test_unreachable_threshold_flags_none(self):
        reports = paper_rate_board().flag_forums(tau_forum=1.0)
        assert not any(r.flagged for r in reports)

    def test_partition(self):
        reports = paper_rate_board().flag_forums()
        assert {r.forum_id for r in reports} == set(FORUM_RATES)

    @given(
        tau_a=st.floats(0, 1),
        tau_b=st.floats(0, 1),
    )
    @settings(max_examples=30, deadline=None)
    def test_monotonic_in_thresholds(self, tau_a, tau_b):
        board = paper_rate_board()
        lo, hi = sorted([tau_a, tau_b])
        rates_lo = dict((f, r) for f, _n, r in board.forum_rates(tau_post=lo))
        rates_hi = dict((f, r) for f, _n, r in board.forum_rates(tau_post=hi))
        for forum in rates_lo:
            assert rates_hi[forum] <= rates_lo[forum]
        flagged_lo = {r.forum_id for r in board.flag_forums(tau_forum=lo) if r.flagged}
        flagged_hi = {r.forum_id for r in board.flag_forums(tau_forum=hi) if r.flagged}
        assert flagged_hi <= flagged_lo

    def test_ingestion_order_irrelevant(self):
        records = [
            ScoreRecord("a", "f1", 0.9),
            ScoreRecord("b", "f1", 0.1),
            ScoreRecord("c", "f2", 0.6),
        ]
        b1, b2 = ScoreBoard(), ScoreBoard()
        b1.ingest(records)
        b2.ingest(list(reversed(records)))
        assert b1.forum_rates() == b2.forum_rates()


class TestSerialization:
    def test_jsonl_file(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        path.write_text(
            '{"posting_id": "p1", "forum_id": "f1", "p_positive": 0.7}\n'
            '{"posting_id": "p2", "forum_id": "f1", "p_positive": 0.2}\n'
        )
        records = read_scores_jsonl(str(path))
        assert len(records) == 2

    def test_jsonl_bad_line_reported(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        path.write_text('{"posting_id": "p1", "forum_id": "f1", "p_positive": 1.2}\n')
        with pytest.raises(ScoreError, match="line 1"):
            read_scores_jsonl(str(path))

    def test_tsv_and_json_outputs(self):
        reports = paper_rate_board().flag_forums()
        tsv = reports_to_tsv(reports)
        assert tsv.splitlines()[0] == "forum_id\tn\trate\tflagged"
        parsed = json.loads(reports_to_json(reports))
        assert len(parsed) == 6

    def test_persistence_round_trip(self, tmp_path):
        path = str(tmp_path / "scores.jsonl")
        board = ScoreBoard(path)
        board.ingest([ScoreRecord("p1", "f1", 0.7)])
        reloaded = ScoreBoard(path)
        assert len(reloaded) == 1
