#!/usr/bin/env python3
"""Simulate a full annotation campaign and print the agreement report.

One calibration round (100 postings x 8 annotators) followed by 65 regular
rounds (100 postings x 3 annotators each), labels drawn from a fixed
distribution, everything in memory.

Usage: python3 scripts/simulate_campaign.py [--seed N]
"""

import argparse
import time

import numpy as np

from annolab import campaign
from annolab.agreement import AnnotationMatrix, agreement_report, count_pairs
from annolab.store import Annotation, Annotator, CorpusStore, Posting

LABEL_PROBS = (0.665, 0.073, 0.142, 0.094, 0.026)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    t0 = time.perf_counter()
    store = CorpusStore()
    annotators = [
        Annotator(f"ann-{i}", f"Annotator {i}", "moderator" if i < 6 else "nlp_expert")
        for i in range(8)
    ]
    store.add_annotators(annotators)
    store.ingest_postings(
        [
            Posting(f"p{i:05d}", f"forum-{i % 6}", f"comment {i}", "S3_random_sample")
            for i in range(6600)
        ]
    )
    ids = sorted(store.postings)
    pool = {a.id for a in annotators}
    rounds = [campaign.create_calibration_round(store, ids[:100], pool)]
    for i in range(65):
        rounds.append(
            campaign.create_round(store, ids[100 + i * 100 : 200 + i * 100], pool, k=3, seed=i)
        )

    rng = np.random.default_rng(args.seed)
    annotations = []
    for rnd in rounds:
        for aid in sorted(rnd.annotator_ids):
            for pid in rnd.posting_ids:
                label = int(rng.choice(5, p=LABEL_PROBS))
                annotations.append(Annotation(pid, aid, rnd.id, label))
    store.upsert_annotations(annotations)

    matrix = AnnotationMatrix.from_store(store)
    n_ann, n_pairs = count_pairs(matrix)
    print(f"annotations: {n_ann}   pairable annotation pairs: {n_pairs}")
    print(agreement_report(matrix).to_json())
    print(f"elapsed: {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
