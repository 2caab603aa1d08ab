import numpy as np
import pytest

from annolab.store import Annotator, CorpusStore, Posting

# Pairing-frequency table reported for the production annotation campaign
# (relative frequency of label pairs over all co-annotations, 3 decimals).
PAIRING_FREQS = np.array(
    [
        [0.525, 0.032, 0.037, 0.015, 0.003],
        [0.032, 0.014, 0.020, 0.009, 0.001],
        [0.037, 0.020, 0.052, 0.036, 0.007],
        [0.015, 0.009, 0.036, 0.044, 0.016],
        [0.003, 0.001, 0.007, 0.016, 0.013],
    ]
)

# Published label distribution of the full campaign (proportions per label).
LABEL_DIST = (0.665, 0.073, 0.142, 0.094, 0.026)

# Published per-forum positive rates: three busy forums, three quiet ones.
FORUM_RATES = {
    "forum-1": 0.23,
    "forum-2": 0.17,
    "forum-3": 0.27,
    "forum-4": 0.01,
    "forum-5": 0.02,
    "forum-6": 0.07,
}


def make_posting(pid, forum="f1", text=None, prob=None):
    return Posting(
        id=pid,
        forum_id=forum,
        text=text or f"comment text {pid}",
        source_tag="S3_random_sample",
        preclass_prob=prob,
    )


def make_annotators(n=8):
    return [
        Annotator(id=f"ann-{i}", display_name=f"Annotator {i}",
                  role="nlp_expert" if i == 7 else "moderator")
        for i in range(n)
    ]


@pytest.fixture
def store():
    s = CorpusStore()
    s.add_annotators(make_annotators())
    s.ingest_postings([make_posting(f"p{i:04d}") for i in range(200)])
    return s
