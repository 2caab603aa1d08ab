"""Inter-annotator statistics over the items x annotators label matrix.

Everything here is a pure function of an immutable matrix snapshot:
label distribution, the symmetric pair-confusion table, Krippendorff's
alpha (nominal and ordinal, via the coincidence matrix), percent agreement
(micro over annotation pairs / macro over annotator pairs), Cohen's kappa
(per pair and macro), and a pooled pairwise F1-macro.

Note the pair table and the coincidence matrix are different objects: the
coincidence matrix weights each item's pairs by 1/(m-1) while the pair
table counts each unordered co-annotation once, so alpha cannot be derived
from the pair table when items have varying numbers of annotators.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .labels import NUM_CLASSES, binarize
from .store import CorpusStore


class UndefinedStatistic(Exception):
    """Raised when a statistic has no defined value for the given data."""


@dataclass(frozen=True)
class AnnotationMatrix:
    """Partial items x annotators matrix of labels."""

    items: tuple[str, ...]
    annotators: tuple[str, ...]
    cells: dict[tuple[str, str], int]

    @classmethod
    def from_store(cls, store: CorpusStore) -> "AnnotationMatrix":
        cells = {
            (ann.posting_id, ann.annotator_id): ann.label
            for ann in store.annotations.values()
        }
        items = tuple(sorted({pid for pid, _ in cells}))
        annotators = tuple(sorted({aid for _, aid in cells}))
        return cls(items=items, annotators=annotators, cells=cells)

    @classmethod
    def from_rows(cls, rows: dict[str, dict[str, int]]) -> "AnnotationMatrix":
        """rows: item id -> {annotator id -> label}."""
        cells = {
            (item, aid): label
            for item, by_ann in rows.items()
            for aid, label in by_ann.items()
        }
        items = tuple(sorted(rows))
        annotators = tuple(sorted({aid for _, aid in cells}))
        return cls(items=items, annotators=annotators, cells=cells)

    def item_labels(self, item: str) -> list[int]:
        return [
            self.cells[(item, aid)]
            for aid in self.annotators
            if (item, aid) in self.cells
        ]

    def binarized(self) -> "AnnotationMatrix":
        return AnnotationMatrix(
            items=self.items,
            annotators=self.annotators,
            cells={k: binarize(v) for k, v in self.cells.items()},
        )

    @property
    def n_annotations(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class LabelDistribution:
    proportions: tuple[float, ...]
    total: int

    def positive_share(self) -> float:
        return float(sum(self.proportions[1:]))


@dataclass(frozen=True)
class PairTable:
    """Symmetric table of co-annotation label pairings.

    Each unordered annotator pair on an item contributes one unit, split as
    half to (a,b) and half to (b,a). `counts` holds the raw units; use
    relative() for the form whose entries sum to 1.
    """

    counts: np.ndarray
    n_pairs: int

    def __post_init__(self):
        if not np.allclose(self.counts, self.counts.T):
            raise ValueError("pair table must be symmetric")

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    def relative(self) -> np.ndarray:
        if self.n_pairs == 0:
            raise UndefinedStatistic("no co-annotated items")
        return self.counts / self.counts.sum()

    @classmethod
    def from_relative(cls, rel, n_pairs: int = 1) -> "PairTable":
        rel = np.asarray(rel, dtype=float)
        return cls(counts=rel * n_pairs, n_pairs=n_pairs)

    def binarized(self) -> "PairTable":
        """Collapse classes 1..4 into one positive class."""
        if self.size == 2:
            return self
        c = self.counts
        out = np.array(
            [
                [c[0, 0], c[0, 1:].sum()],
                [c[1:, 0].sum(), c[1:, 1:].sum()],
            ]
        )
        return PairTable(counts=out, n_pairs=self.n_pairs)

    def micro_agreement(self) -> float:
        """Fraction of agreeing pairs: the trace of the relative table."""
        return float(np.trace(self.relative()))

    def f1_per_class(self) -> np.ndarray:
        """Per-class F1 from the pooled symmetric table.

        By symmetry the marginal is the same along rows and columns, so
        precision = recall = diagonal / marginal.
        """
        rel = self.relative()
        marg = rel.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(marg > 0, np.diag(rel) / marg, np.nan)

    def f1_macro(self) -> float:
        per_class = self.f1_per_class()
        present = ~np.isnan(per_class)
        if not present.any():
            raise UndefinedStatistic("no class has any pair mass")
        return float(per_class[present].mean())

    def to_csv(self) -> str:
        """Display form matching the published table layout: labels as
        row/column headers, 3-decimal rounding (display only)."""
        rel = self.relative()
        labels = list(range(self.size))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + [str(l) for l in labels])
        for l in labels:
            writer.writerow([str(l)] + [f"{rel[l, k]:.3f}" for k in labels])
        return buf.getvalue()


def label_distribution(matrix: AnnotationMatrix) -> LabelDistribution:
    if matrix.n_annotations == 0:
        raise UndefinedStatistic("empty annotation matrix")
    counts = np.zeros(NUM_CLASSES)
    for label in matrix.cells.values():
        counts[label] += 1
    return LabelDistribution(
        proportions=tuple(counts / counts.sum()), total=int(counts.sum())
    )


def count_pairs(matrix: AnnotationMatrix) -> tuple[int, int]:
    """(number of annotations, number of co-annotation pairs sum C(m_i,2))."""
    n_pairs = 0
    for item in matrix.items:
        m = len(matrix.item_labels(item))
        n_pairs += m * (m - 1) // 2
    return matrix.n_annotations, n_pairs


def pair_confusion(matrix: AnnotationMatrix, binarized: bool = False) -> PairTable:
    if binarized:
        matrix = matrix.binarized()
    size = 2 if binarized else NUM_CLASSES
    counts = np.zeros((size, size))
    n_pairs = 0
    for item in matrix.items:
        labels = matrix.item_labels(item)
        for a, b in combinations(labels, 2):
            counts[a, b] += 0.5
            counts[b, a] += 0.5
            n_pairs += 1
    if n_pairs == 0:
        raise UndefinedStatistic("no item has two or more annotations")
    return PairTable(counts=counts, n_pairs=n_pairs)


def percent_agreement_micro(matrix: AnnotationMatrix, binarized: bool = False) -> float:
    return pair_confusion(matrix, binarized).micro_agreement()


def _shared_items(matrix: AnnotationMatrix, a: str, b: str) -> list[str]:
    return [
        item
        for item in matrix.items
        if (item, a) in matrix.cells and (item, b) in matrix.cells
    ]


def percent_agreement_macro(matrix: AnnotationMatrix, binarized: bool = False) -> float:
    """Unweighted mean of per-annotator-pair agreement rates, restricted to
    pairs that share at least one item."""
    if binarized:
        matrix = matrix.binarized()
    rates = []
    for a, b in combinations(matrix.annotators, 2):
        shared = _shared_items(matrix, a, b)
        if not shared:
            continue
        agree = sum(
            1 for item in shared if matrix.cells[(item, a)] == matrix.cells[(item, b)]
        )
        rates.append(agree / len(shared))
    if not rates:
        raise UndefinedStatistic("no annotator pair shares an item")
    return float(np.mean(rates))


def coincidence_matrix(matrix: AnnotationMatrix) -> tuple[list[int], np.ndarray]:
    """Coincidence matrix over the observed label values (sorted).

    For every item with m >= 2 annotations, each ordered pair of labels from
    different annotators adds 1/(m-1) to its cell.
    """
    values = sorted(set(matrix.cells.values()))
    index = {v: i for i, v in enumerate(values)}
    coin = np.zeros((len(values), len(values)))
    for item in matrix.items:
        labels = matrix.item_labels(item)
        m = len(labels)
        if m < 2:
            continue
        w = 1.0 / (m - 1)
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                if i != j:
                    coin[index[a], index[b]] += w
    return values, coin


def _ordinal_delta(marginals: np.ndarray) -> np.ndarray:
    """delta(c,k) = (sum_{g=c}^{k} n_g - (n_c + n_k)/2)^2 over value indices."""
    v = len(marginals)
    cum = np.concatenate([[0.0], np.cumsum(marginals)])
    delta = np.zeros((v, v))
    for c in range(v):
        for k in range(v):
            lo, hi = min(c, k), max(c, k)
            between = cum[hi + 1] - cum[lo]
            delta[c, k] = (between - (marginals[c] + marginals[k]) / 2.0) ** 2
    return delta


def krippendorff_alpha(
    matrix: AnnotationMatrix, metric: str = "nominal", binarized: bool = False
) -> float:
    """alpha = 1 - D_o / D_e from the coincidence matrix.

    metric "nominal": delta(c,k) = 1 if c != k. metric "ordinal": squared
    sum of coincidence marginals between the two values. Binarization maps
    labels through binarize() first and uses the nominal metric.
    """
    if binarized:
        matrix = matrix.binarized()
        metric = "nominal"
    values, coin = coincidence_matrix(matrix)
    n_c = coin.sum(axis=1)
    n = n_c.sum()
    if n == 0:
        raise UndefinedStatistic("no item has two or more annotations")
    if len(values) < 2:
        raise UndefinedStatistic("all annotations share a single label")
    if metric == "nominal":
        delta = 1.0 - np.eye(len(values))
    elif metric == "ordinal":
        delta = _ordinal_delta(n_c)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    d_o = float((coin * delta).sum()) / n
    d_e = float((np.outer(n_c, n_c) * delta).sum()) / (n * (n - 1))
    if d_e == 0:
        raise UndefinedStatistic("expected disagreement is zero")
    return 1.0 - d_o / d_e


def cohen_kappa(
    matrix: AnnotationMatrix, annotator_a: str, annotator_b: str, binarized: bool = False
) -> float:
    """Chance-corrected agreement between one annotator pair, with expected
    agreement from each annotator's own marginals on their shared items."""
    if binarized:
        matrix = matrix.binarized()
    shared = _shared_items(matrix, annotator_a, annotator_b)
    if not shared:
        raise UndefinedStatistic(
            f"annotators {annotator_a!r} and {annotator_b!r} share no items"
        )
    n = len(shared)
    labels_a = [matrix.cells[(item, annotator_a)] for item in shared]
    labels_b = [matrix.cells[(item, annotator_b)] for item in shared]
    p_o = sum(1 for x, y in zip(labels_a, labels_b) if x == y) / n
    values = set(labels_a) | set(labels_b)
    p_e = sum(
        (labels_a.count(v) / n) * (labels_b.count(v) / n) for v in values
    )
    if p_e >= 1.0 - 1e-12:
        raise UndefinedStatistic("degenerate marginals (expected agreement is 1)")
    return (p_o - p_e) / (1.0 - p_e)


def kappa_macro(
    matrix: AnnotationMatrix, binarized: bool = False
) -> tuple[float, int]:
    """Unweighted mean of pairwise kappas; degenerate pairs are skipped, not
    imputed. Returns (kappa, number of skipped pairs)."""
    kappas = []
    skipped = 0
    for a, b in combinations(matrix.annotators, 2):
        try:
            kappas.append(cohen_kappa(matrix, a, b, binarized))
        except UndefinedStatistic as exc:
            if "share no items" in str(exc):
                continue
            skipped += 1
    if not kappas:
        raise UndefinedStatistic("no annotator pair has a defined kappa")
    return float(np.mean(kappas)), skipped


def pairwise_f1_macro(matrix: AnnotationMatrix, binarized: bool = False) -> float:
    return pair_confusion(matrix, binarized).f1_macro()


@dataclass
class AgreementReport:
    n_annotations: int = 0
    n_pairs: int = 0
    alpha_nominal: Optional[float] = None
    alpha_ordinal: Optional[float] = None
    alpha_binary: Optional[float] = None
    pct_micro: Optional[float] = None
    pct_macro: Optional[float] = None
    pct_micro_binary: Optional[float] = None
    pct_macro_binary: Optional[float] = None
    kappa_macro: Optional[float] = None
    kappa_macro_binary: Optional[float] = None
    kappa_skipped_pairs: int = 0
    f1_macro_pairs: Optional[float] = None
    f1_macro_pairs_binary: Optional[float] = None
    label_distribution: Optional[tuple[float, ...]] = None
    pair_table_relative: Optional[list[list[float]]] = None
    undefined: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n_annotations": self.n_annotations,
            "n_pairs": self.n_pairs,
            "alpha_nominal": self.alpha_nominal,
            "alpha_ordinal": self.alpha_ordinal,
            "alpha_binary": self.alpha_binary,
            "pct_micro": self.pct_micro,
            "pct_macro": self.pct_macro,
            "pct_micro_binary": self.pct_micro_binary,
            "pct_macro_binary": self.pct_macro_binary,
            "kappa_macro": self.kappa_macro,
            "kappa_macro_binary": self.kappa_macro_binary,
            "kappa_skipped_pairs": self.kappa_skipped_pairs,
            "f1_macro_pairs": self.f1_macro_pairs,
            "f1_macro_pairs_binary": self.f1_macro_pairs_binary,
            "label_distribution": list(self.label_distribution)
            if self.label_distribution
            else None,
            "pair_table_relative": self.pair_table_relative,
            "undefined": self.undefined,
        }
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def agreement_report(matrix: AnnotationMatrix) -> AgreementReport:
    """Compute every statistic; ones that are undefined for this matrix are
    reported as absent with the reason, never as silent zeros."""
    report = AgreementReport()
    report.n_annotations, report.n_pairs = count_pairs(matrix)

    def compute(field_name, fn):
        try:
            setattr(report, field_name, fn())
        except UndefinedStatistic as exc:
            report.undefined[field_name] = str(exc)

    compute("alpha_nominal", lambda: krippendorff_alpha(matrix, "nominal"))
    compute("alpha_ordinal", lambda: krippendorff_alpha(matrix, "ordinal"))
    compute("alpha_binary", lambda: krippendorff_alpha(matrix, binarized=True))
    compute("pct_micro", lambda: percent_agreement_micro(matrix))
    compute("pct_macro", lambda: percent_agreement_macro(matrix))
    compute("pct_micro_binary", lambda: percent_agreement_micro(matrix, True))
    compute("pct_macro_binary", lambda: percent_agreement_macro(matrix, True))
    compute("f1_macro_pairs", lambda: pairwise_f1_macro(matrix))
    compute("f1_macro_pairs_binary", lambda: pairwise_f1_macro(matrix, True))
    try:
        k, skipped = kappa_macro(matrix)
        report.kappa_macro = k
        report.kappa_skipped_pairs = skipped
    except UndefinedStatistic as exc:
        report.undefined["kappa_macro"] = str(exc)
    try:
        kb, _ = kappa_macro(matrix, binarized=True)
        report.kappa_macro_binary = kb
    except UndefinedStatistic as exc:
        report.undefined["kappa_macro_binary"] = str(exc)
    try:
        report.label_distribution = label_distribution(matrix).proportions
    except UndefinedStatistic as exc:
        report.undefined["label_distribution"] = str(exc)
    try:
        report.pair_table_relative = pair_confusion(matrix).relative().tolist()
    except UndefinedStatistic as exc:
        report.undefined["pair_table_relative"] = str(exc)
    return report
