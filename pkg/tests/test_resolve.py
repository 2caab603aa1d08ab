import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annolab.labels import binarize
from annolab.resolve import (
    GoldRecord,
    binary_target,
    build_gold,
    export_training_set,
    read_gold_tsv,
    resolve_max,
    resolve_most_frequent,
    stratified_folds,
)
from annolab.store import Annotation, ValidationError

from conftest import make_annotators, make_posting


def all_multisets(max_size=4):
    out = []
    for size in range(1, max_size + 1):
        out.extend(itertools.combinations_with_replacement(range(5), size))
    return out


def naive_most_frequent(labels):
    # pick the label maximizing (frequency, value) by linear scan
    return max(sorted(set(labels)), key=lambda l: (list(labels).count(l), l))


def naive_max(labels):
    best = labels[0]
    for l in labels[1:]:
        if l > best:
            best = l
    return best


class TestResolvers:
    def test_unique_mode(self):
        assert resolve_most_frequent([2, 2, 3]) == 2

    def test_tie_goes_to_highest(self):
        assert resolve_most_frequent([0, 0, 3, 3]) == 3

    def test_all_distinct_falls_back_to_max(self):
        assert resolve_most_frequent([0, 1, 2]) == 2

    def test_singleton(self):
        assert resolve_most_frequent([4]) == 4

    def test_max_examples(self):
        assert resolve_max([0, 0, 0]) == 0
        assert resolve_max([0, 0, 1]) == 1
        assert resolve_max([1, 4, 2]) == 4

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            resolve_most_frequent([])
        with pytest.raises(ValidationError):
            resolve_max([])

    def test_exhaustive_oracle(self):
        multisets = all_multisets()
        assert len(multisets) == 125  # sizes 1..4 over 5 labels
        for ms in multisets:
            ms = list(ms)
            assert resolve_most_frequent(ms) == naive_most_frequent(ms)
            assert resolve_max(ms) == naive_max(ms)
            assert resolve_max(ms) >= resolve_most_frequent(ms)
            assert binary_target(ms, "max") == binarize(resolve_max(ms))

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_unanimous_agreement_between_strategies(self, labels):
        if len(set(labels)) == 1:
            assert resolve_max(labels) == resolve_most_frequent(labels)
        assert resolve_max(labels) >= resolve_most_frequent(labels)


class TestBinaryTarget:
    def test_max_strategy(self):
        assert binary_target([0, 0, 1], "max") == 1

    def test_most_frequent_majority(self):
        assert binary_target([0, 0, 1], "most_frequent") == 0

    def test_most_frequent_tie_positive(self):
        assert binary_target([0, 1], "most_frequent") == 1

    def test_resolve_first_variant(self):
        # binarize(resolve_most_frequent(...)) instead of majority-of-binarized
        assert binary_target([0, 1], "most_frequent", resolve_first=True) == 1
        assert binary_target([0, 0, 2], "most_frequent", resolve_first=True) == 0


def fake_records(class_counts, strategy="most_frequent"):
    records = []
    i = 0
    for cls, count in class_counts.items():
        for _ in range(count):
            records.append(
                GoldRecord(f"p{i:05d}", cls, 0 if cls == 0 else 1, strategy)
            )
            i += 1
    return records


class TestStratifiedFolds:
    def test_exact_divisibility(self):
        records = fake_records({0: 50, 1: 50})
        plan = stratified_folds(records, k=5, seed=1)
        by_id = {r.posting_id: r for r in records}
        for fold in range(5):
            labels = [by_id[pid].gold_label for pid in plan.fold_ids(fold)]
            assert Counter(labels) == {0: 10, 1: 10}

    def test_uneven_counts_within_one(self):
        records = fake_records({0: 70, 1: 33})
        plan = stratified_folds(records, k=5, seed=2)
        by_id = {r.posting_id: r for r in records}
        for fold in range(5):
            counts = Counter(by_id[pid].gold_label for pid in plan.fold_ids(fold))
            assert abs(counts[0] - 14.0) <= 1
            assert abs(counts[1] - 6.6) <= 1

    def test_deterministic(self):
        records = fake_records({0: 40, 1: 21, 2: 9})
        p1 = stratified_folds(records, k=5, seed=3)
        p2 = stratified_folds(records, k=5, seed=3)
        assert p1.assignment == p2.assignment
        assert p1.dev_assignment == p2.dev_assignment

    def test_partition(self):
        records = fake_records({0: 31, 2: 17, 4: 8})
        plan = stratified_folds(records, k=4, seed=0)
        all_ids = set()
        for fold in range(4):
            ids = set(plan.fold_ids(fold))
            assert not ids & all_ids
            all_ids |= ids
        assert all_ids == {r.posting_id for r in records}

    def test_dev_split_fraction(self):
        records = fake_records({0: 100, 1: 100})
        plan = stratified_folds(records, k=5, seed=4)
        by_id = {r.posting_id: r for r in records}
        for fold in range(5):
            train, dev, test = plan.split(fold)
            assert set(train) | set(dev) | set(test) == set(by_id)
            dev_counts = Counter(by_id[pid].gold_label for pid in dev)
            for cls in (0, 1):
                n_train_class = sum(
                    1 for pid in train + dev if by_id[pid].gold_label == cls
                )
                assert abs(dev_counts[cls] - 0.1 * n_train_class) <= 1

    def test_small_class_warning(self):
        records = fake_records({0: 50, 4: 2})
        plan = stratified_folds(records, k=5, seed=0)
        assert any("class 4" in w for w in plan.warnings)


class TestGoldPipeline:
    def _store_with_annotations(self):
        from annolab.store import CorpusStore
        from annolab import campaign

        s = CorpusStore()
        s.add_annotators(make_annotators(3))
        s.ingest_postings([make_posting(f"p{i}") for i in range(4)])
        rnd = campaign.create_calibration_round(
            s, [f"p{i}" for i in range(4)], {"ann-0", "ann-1", "ann-2"}
        )
        labels = {"p0": [0, 0, 1], "p1": [2, 2, 3], "p2": [0, 1, 2], "p3": [4, 4, 4]}
        for pid, ls in labels.items():
            for j, l in enumerate(ls):
                s.upsert_annotations([Annotation(pid, f"ann-{j}", rnd.id, l)])
        return s

    def test_build_gold_both_strategies(self):
        s = self._store_with_annotations()
        mf = {r.posting_id: r for r in build_gold(s, "most_frequent")}
        mx = {r.posting_id: r for r in build_gold(s, "max")}
        assert mf["p0"].gold_label == 0 and mx["p0"].gold_label == 1
        assert mf["p1"].gold_label == 2 and mx["p1"].gold_label == 3
        assert mf["p2"].gold_label == 2 and mx["p2"].gold_label == 2
        assert mf["p3"].gold_label == 4 and mx["p3"].gold_label == 4
        assert mf["p0"].gold_binary == 0 and mx["p0"].gold_binary == 1

    def test_export_round_trip(self, tmp_path):
        s = self._store_with_annotations()
        records = build_gold(s, "max")
        plan = stratified_folds(records, k=2, seed=0)
        paths = export_training_set(s, records, plan, str(tmp_path), fmt="tsv")
        assert len(paths) == 6
        test_ids = set()
        for fold in range(2):
            got = read_gold_tsv(str(tmp_path / f"fold{fold}.test.tsv"), strategy="max")
            test_ids.update(r.posting_id for r in got)
            by_id = {r.posting_id: r for r in records}
            for rec in got:
                assert rec.gold_label == by_id[rec.posting_id].gold_label
                assert rec.gold_binary == by_id[rec.posting_id].gold_binary
        assert test_ids == {r.posting_id for r in records}

    def test_missing_posting_named(self, tmp_path):
        s = self._store_with_annotations()
        records = build_gold(s, "max") + [GoldRecord("ghost", 0, 0, "max")]
        plan = stratified_folds(records, k=2, seed=0)
        with pytest.raises(Exception, match="ghost"):
            export_training_set(s, records, plan, str(tmp_path))
