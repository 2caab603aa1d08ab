"""HTTP JSON API over the store: assignments, annotations, statistics,
disagreements, rounds and forum flags.

Authentication is a static bearer-token map (token -> annotator id + role);
at eight known annotators there is no account system. Every response
carries an X-Schema-Version header. Mutations are upserts, so any request
sequence is replay-safe.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .. import campaign
from ..agreement import AnnotationMatrix, agreement_report
from ..flagging import ScoreBoard
from ..labels import SCALE_NAMES
from ..store import (
    Annotation,
    CorpusStore,
    NotFoundError,
    StoreError,
    ValidationError,
)

API_SCHEMA_VERSION = "1"

ROLES = ("annotator", "coordinator", "moderator")


class Session(BaseModel):
    annotator_id: str
    role: str


class AnnotationIn(BaseModel):
    posting_id: str
    label: int


class RoundIn(BaseModel):
    kind: str = "regular"
    posting_ids: Optional[list[str]] = None
    sampler: Optional[dict] = None
    k: int = 3
    seed: int = 0


def create_app(
    store: CorpusStore,
    tokens: dict[str, dict],
    scores: Optional[ScoreBoard] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="annolab")
    scores = scores if scores is not None else ScoreBoard()

    @app.middleware("http")
    async def schema_version_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Schema-Version"] = API_SCHEMA_VERSION
        return response

    def session(request: Request) -> Session:
        auth = request.headers.get("Authorization", "")
        if not auth.startswith("Bearer "):
            raise HTTPException(401, "missing bearer token")
        entry = tokens.get(auth[len("Bearer ") :])
        if entry is None:
            raise HTTPException(401, "unknown token")
        return Session(annotator_id=entry["annotator_id"], role=entry["role"])

    def require_role(sess: Session, *roles: str) -> None:
        if sess.role not in roles:
            raise HTTPException(403, f"requires role in {roles}, got {sess.role!r}")

    @app.exception_handler(NotFoundError)
    async def not_found(request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ValidationError)
    async def invalid(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/assignments")
    def assignments(sess: Session = Depends(session)):
        open_postings = []
        for rnd in store.rounds.values():
            if rnd.status != "open" or sess.annotator_id not in rnd.annotator_ids:
                continue
            for pid in rnd.posting_ids:
                if (pid, sess.annotator_id) in store.annotations:
                    continue
                open_postings.append(
                    {
                        "posting_id": pid,
                        "round_id": rnd.id,
                        "text": store.postings[pid].text,
                    }
                )
        return {
            "annotator_id": sess.annotator_id,
            "scale": {str(v): name for v, name in SCALE_NAMES.items()},
            "postings": open_postings,
        }

    @app.post("/api/annotations")
    def post_annotation(body: AnnotationIn, sess: Session = Depends(session)):
        if not 0 <= body.label <= 4:
            raise HTTPException(
                422, f"label must be an integer in 0..4, got {body.label}"
            )
        if body.posting_id not in store.postings:
            raise HTTPException(404, f"unknown posting {body.posting_id!r}")
        round_id = None
        for rnd in store.rounds.values():
            if body.posting_id in rnd.posting_ids:
                round_id = rnd.id
                if sess.annotator_id not in rnd.annotator_ids:
                    raise HTTPException(
                        403, f"annotator not assigned to round {rnd.id!r}"
                    )
                break
        if round_id is None:
            raise HTTPException(404, f"posting {body.posting_id!r} is in no round")
        ann = Annotation(
            posting_id=body.posting_id,
            annotator_id=sess.annotator_id,
            round_id=round_id,
            label=body.label,
            submitted_at=datetime.now(timezone.utc).isoformat(),
        )
        store.upsert_annotations([ann])
        return {
            "posting_id": ann.posting_id,
            "annotator_id": ann.annotator_id,
            "round_id": ann.round_id,
            "label": ann.label,
        }

    @app.get("/api/rounds/{round_id}/disagreements")
    def disagreements(round_id: str, sess: Session = Depends(session)):
        require_role(sess, "coordinator")
        records = campaign.rank_disagreements(store, round_id)
        return [
            {"posting_id": r.posting_id, "labels": list(r.labels), "score": r.score}
            for r in records
        ]

    @app.get("/api/stats")
    def stats(sess: Session = Depends(session)):
        matrix = AnnotationMatrix.from_store(store)
        report = agreement_report(matrix) if matrix.n_annotations else None
        open_per_annotator: dict[str, int] = {}
        for rnd in store.rounds.values():
            if rnd.status != "open":
                continue
            for aid in rnd.annotator_ids:
                done = sum(1 for pid in rnd.posting_ids if (pid, aid) in store.annotations)
                open_per_annotator[aid] = open_per_annotator.get(aid, 0) + (
                    len(rnd.posting_ids) - done
                )
        return {
            "n_postings": len(store.postings),
            "n_rounds": len(store.rounds),
            "n_annotations": len(store.annotations),
            "agreement": report.to_dict() if report else None,
            "open_assignments": open_per_annotator,
        }

    @app.get("/api/flags")
    def flags(
        tau_forum: float = Query(default=0.10),
        tau_post: float = Query(default=0.5),
        sess: Session = Depends(session),
    ):
        require_role(sess, "moderator", "coordinator")
        return [
            {
                "forum_id": r.forum_id,
                "n": r.n_postings,
                "rate": r.positive_rate,
                "flagged": r.flagged,
                "tau_post": r.tau_post,
                "tau_forum": r.tau_forum,
            }
            for r in scores.flag_forums(tau_post=tau_post, tau_forum=tau_forum)
        ]

    @app.post("/api/rounds")
    def create_round(body: RoundIn, sess: Session = Depends(session)):
        require_role(sess, "coordinator")
        posting_ids = body.posting_ids
        if posting_ids is None:
            spec = body.sampler or {}
            mode = spec.get("mode", "random")
            n = int(spec.get("n", 100))
            if mode == "random":
                posting_ids = store.sample_random(n, seed=body.seed)
            else:
                posting_ids = store.sample_preclassified(
                    mode, n, epsilon=float(spec.get("epsilon", 0.1))
                )
        if body.kind == "calibration":
            rnd = campaign.create_calibration_round(
                store, posting_ids, {a.id for a in store.active_annotators()}
            )
        else:
            rnd = campaign.create_round(
                store,
                posting_ids,
                {a.id for a in store.active_annotators()},
                k=body.k,
                seed=body.seed,
            )
        return {
            "id": rnd.id,
            "kind": rnd.kind,
            "posting_ids": rnd.posting_ids,
            "annotator_ids": sorted(rnd.annotator_ids),
            "status": rnd.status,
        }

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def load_tokens(path: str) -> dict[str, dict]:
    import json

    with open(path, encoding="utf-8") as fh:
        tokens = json.load(fh)
    for token, entry in tokens.items():
        if entry.get("role") not in ROLES:
            raise StoreError(f"token map: bad role for token {token!r}")
    return tokens
