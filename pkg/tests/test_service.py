import pytest
from fastapi.testclient import TestClient

from annolab import campaign
from annolab.flagging import ScoreBoard, ScoreRecord
from annolab.service.app import create_app
from annolab.store import Annotation, CorpusStore

from conftest import FORUM_RATES, make_annotators, make_posting

TOKENS = {
    "tok-ann": {"annotator_id": "ann-0", "role": "annotator"},
    "tok-coord": {"annotator_id": "ann-1", "role": "coordinator"},
    "tok-mod": {"annotator_id": "ann-2", "role": "moderator"},
}


def auth(token):
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def api():
    store = CorpusStore()
    store.add_annotators(make_annotators(4))
    store.ingest_postings([make_posting(f"p{i}") for i in range(10)])
    rnd = campaign.create_calibration_round(
        store, [f"p{i}" for i in range(5)], {"ann-0", "ann-1"}
    )
    scores = ScoreBoard()
    for forum, rate in FORUM_RATES.items():
        positives = round(rate * 100)
        scores.ingest(
            [
                ScoreRecord(f"{forum}-p{i}", forum, 0.9 if i < positives else 0.1)
                for i in range(100)
            ]
        )
    client = TestClient(create_app(store, TOKENS, scores))
    return client, store, rnd


class TestAuth:
    def test_missing_token(self, api):
        client, *_ = api
        assert client.get("/api/assignments").status_code == 401

    def test_unknown_token(self, api):
        client, *_ = api
        assert client.get("/api/assignments", headers=auth("nope")).status_code == 401

    def test_role_enforced(self, api):
        client, _, rnd = api
        r = client.get(f"/api/rounds/{rnd.id}/disagreements", headers=auth("tok-ann"))
        assert r.status_code == 403

    def test_schema_version_header(self, api):
        client, *_ = api
        r = client.get("/api/assignments", headers=auth("tok-ann"))
        assert r.headers["X-Schema-Version"] == "1"


class TestAssignmentsAndAnnotations:
    def test_open_assignments(self, api):
        client, *_ = api
        body = client.get("/api/assignments", headers=auth("tok-ann")).json()
        assert len(body["postings"]) == 5
        assert body["scale"]["1"] == "mild"
        assert body["scale"]["4"] == "extreme"

    def test_post_annotation_and_progress(self, api):
        client, store, _ = api
        r = client.post(
            "/api/annotations", json={"posting_id": "p0", "label": 2}, headers=auth("tok-ann")
        )
        assert r.status_code == 200
        assert r.json()["label"] == 2
        body = client.get("/api/assignments", headers=auth("tok-ann")).json()
        assert len(body["postings"]) == 4

    def test_invalid_label_is_422_with_range(self, api):
        client, *_ = api
        r = client.post(
            "/api/annotations", json={"posting_id": "p0", "label": 5}, headers=auth("tok-ann")
        )
        assert r.status_code == 422
        assert "0..4" in r.json()["detail"]

    def test_idempotent_upsert(self, api):
        client, store, _ = api
        payload = {"posting_id": "p1", "label": 3}
        r1 = client.post("/api/annotations", json=payload, headers=auth("tok-ann"))
        before = len(store.annotations)
        r2 = client.post("/api/annotations", json=payload, headers=auth("tok-ann"))
        assert r1.json() == r2.json()
        assert len(store.annotations) == before

    def test_unknown_posting_404(self, api):
        client, *_ = api
        r = client.post(
            "/api/annotations", json={"posting_id": "ghost", "label": 1}, headers=auth("tok-ann")
        )
        assert r.status_code == 404

    def test_unassigned_annotator_403(self, api):
        client, *_ = api
        r = client.post(
            "/api/annotations", json={"posting_id": "p0", "label": 1}, headers=auth("tok-mod")
        )
        assert r.status_code == 403


class TestStatsAndDisagreements:
    def test_stats_on_perfect_agreement(self, api):
        client, store, rnd = api
        for i, pid in enumerate(rnd.posting_ids):
            for aid in ("ann-0", "ann-1"):
                store.upsert_annotations([Annotation(pid, aid, rnd.id, (i % 4) + 1)])
        body = client.get("/api/stats", headers=auth("tok-coord")).json()
        agreement = body["agreement"]
        assert agreement["pct_micro"] == 1.0
        assert agreement["kappa_macro"] == pytest.approx(1.0)
        assert agreement["alpha_nominal"] == pytest.approx(1.0)
        assert body["n_annotations"] == 10

    def test_disagreements_ranked(self, api):
        client, store, rnd = api
        store.upsert_annotations(
            [
                Annotation("p0", "ann-0", rnd.id, 0),
                Annotation("p0", "ann-1", rnd.id, 4),
                Annotation("p1", "ann-0", rnd.id, 2),
                Annotation("p1", "ann-1", rnd.id, 3),
            ]
        )
        body = client.get(
            f"/api/rounds/{rnd.id}/disagreements", headers=auth("tok-coord")
        ).json()
        assert [r["posting_id"] for r in body] == ["p0", "p1"]
        assert body[0]["score"] == 4.0


class TestFlags:
    def test_default_threshold_groups(self, api):
        client, *_ = api
        body = client.get("/api/flags?tau_forum=0.10", headers=auth("tok-mod")).json()
        flagged = [r["forum_id"] for r in body if r["flagged"]]
        assert set(flagged) == {"forum-1", "forum-2", "forum-3"}
        assert [r["rate"] for r in body[:3]] == [0.27, 0.23, 0.17]

    def test_annotator_cannot_read_flags(self, api):
        client, *_ = api
        assert client.get("/api/flags", headers=auth("tok-ann")).status_code == 403


class TestRoundCreation:
    def test_coordinator_creates_round(self, api):
        client, store, _ = api
        r = client.post(
            "/api/rounds",
            json={"kind": "regular", "posting_ids": ["p7", "p8"], "k": 3, "seed": 1},
            headers=auth("tok-coord"),
        )
        assert r.status_code == 200
        body = r.json()
        assert len(body["annotator_ids"]) == 3
        assert body["posting_ids"] == ["p7", "p8"]

    def test_sampler_spec(self, api):
        client, *_ = api
        r = client.post(
            "/api/rounds",
            json={"kind": "regular", "sampler": {"mode": "random", "n": 2}, "k": 2, "seed": 5},
            headers=auth("tok-coord"),
        )
        assert r.status_code == 200
        assert len(r.json()["posting_ids"]) == 2

    def test_reused_posting_rejected(self, api):
        client, *_ = api
        r = client.post(
            "/api/rounds",
            json={"kind": "regular", "posting_ids": ["p0"], "k": 2, "seed": 0},
            headers=auth("tok-coord"),
        )
        assert r.status_code == 422

    def test_annotator_cannot_create(self, api):
        client, *_ = api
        r = client.post(
            "/api/rounds",
            json={"kind": "regular", "posting_ids": ["p9"], "k": 2},
            headers=auth("tok-ann"),
        )
        assert r.status_code == 403
