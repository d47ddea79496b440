"""HTTP/JSON facade over pools and live labeling sessions.

Thin layer: pool registration, session creation, label submission and
status snapshots all delegate to the in-process loop, so human-driven and
simulated sessions share the same code path. Requests touching one
session are serialized by a per-session lock.
"""

from __future__ import annotations

import json
import os
import threading
import uuid

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .config import ConfigError, config_from_dict
from .loop import (
    BudgetExhaustedError,
    LabelMismatchError,
    LoopError,
    Session,
    init_session,
    submit_labels,
)
from .pool import Pool, PoolError, pool_from_manifest, split_train_test

STATE_DIR_ENV = "ALDISPLAY_STATE_DIR"


class SessionStore:
    """Registered pools and live sessions, with per-session locking."""

    def __init__(self, state_dir: str | None = None):
        self.pools: dict[str, Pool] = {}
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.state_dir = state_dir or os.environ.get(STATE_DIR_ENV)

    def add_pool(self, pool: Pool) -> str:
        pool_id = uuid.uuid4().hex[:12]
        with self._registry_lock:
            self.pools[pool_id] = pool
        return pool_id

    def add_session(self, session: Session) -> str:
        session_id = uuid.uuid4().hex[:12]
        with self._registry_lock:
            self.sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return session_id

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                raise KeyError(session_id)
            return self._locks[session_id]

    def checkpoint(self, session_id: str):
        if not self.state_dir:
            return
        session = self.sessions[session_id]
        out = os.path.join(self.state_dir, session_id)
        os.makedirs(out, exist_ok=True)
        session.history.save(os.path.join(out, "runlog.jsonl"))
        with open(
            os.path.join(out, "labeled.json"), "w", encoding="utf-8"
        ) as fh:
            json.dump(session.labeled.to_dict(), fh, sort_keys=True)


def _display_payload(session: Session, pool_id: str) -> list[dict]:
    out = []
    for item_id in session.pending_display:
        item = session.train_pool.item(item_id)
        entry: dict = {"id": int(item_id)}
        if item.image_refs is not None:
            entry["image_urls"] = {
                "before": f"/pools/{pool_id}/items/{item_id}/before.png",
                "after": f"/pools/{pool_id}/items/{item_id}/after.png",
            }
        else:
            entry["features"] = [float(v) for v in item.features]
        out.append(entry)
    return out


def _metrics_payload(session: Session) -> dict:
    last = session.history.records[-1] if session.history.records else None
    return {
        "iteration": session.iteration,
        "samp_pct": last.samp_pct if last else 0.0,
        "eer": last.test_eer if last else None,
        "reward": last.reward if last else None,
        "display_size": last.display_size if last else 0,
    }


def create_app(state_dir: str | None = None, frontend_dir: str | None = None):
    app = FastAPI(title="aldisplay")
    store = SessionStore(state_dir)
    app.state.store = store
    # session_id -> pool_id, for image URL construction
    session_pool: dict[str, str] = {}

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/pools")
    def list_pools():
        out = []
        for pid, pool in store.pools.items():
            out.append(
                {
                    "pool_id": pid,
                    "name": pool.manifest.get("name", pid),
                    "n": pool.n,
                    "d": pool.d,
                    "has_truth": pool.has_truths,
                    "has_images": any(
                        it.image_refs is not None for it in pool.items
                    ),
                }
            )
        return out

    @app.post("/pools", status_code=201)
    def register_pool(manifest: dict):
        try:
            pool = pool_from_manifest(manifest, os.getcwd())
        except PoolError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"pool_id": store.add_pool(pool)}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        pool_id = body.get("pool_id")
        if pool_id not in store.pools:
            raise HTTPException(status_code=404, detail=f"unknown pool {pool_id!r}")
        pool = store.pools[pool_id]
        try:
            # the pool comes from the registry, not from the config file
            config = config_from_dict(
                {**body.get("config", {}), "pool": {"manifest": f"<registered:{pool_id}>"}}
            )
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            if pool.has_truths:
                train, test = split_train_test(pool, config.seed)
            else:
                train, test = pool, None
            session = init_session(train, test, config)
        except (LoopError, PoolError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session_id = store.add_session(session)
        session_pool[session_id] = pool_id
        store.checkpoint(session_id)
        return {
            "session_id": session_id,
            "display": _display_payload(session, pool_id),
            "iteration": session.iteration,
            "budget": {
                "max_labels": session.budget.max_labels,
                "used": session.budget.used,
            },
        }

    def _get_session(session_id: str) -> Session:
        if session_id not in store.sessions:
            raise HTTPException(
                status_code=404, detail=f"unknown session {session_id!r}"
            )
        return store.sessions[session_id]

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: dict):
        session = _get_session(session_id)
        entries = body.get("labels")
        if not isinstance(entries, list):
            raise HTTPException(status_code=400, detail="body needs a 'labels' list")
        try:
            labels = {int(e["id"]): int(e["label"]) for e in entries}
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(
                status_code=400, detail=f"malformed label entry: {exc}"
            ) from exc
        with store.session_lock(session_id):
            try:
                submit_labels(session, labels)
            except BudgetExhaustedError as exc:
                raise HTTPException(status_code=410, detail=str(exc)) from exc
            except LabelMismatchError as exc:
                raise HTTPException(
                    status_code=409,
                    detail={
                        "message": str(exc),
                        "missing_ids": exc.missing,
                        "extra_ids": exc.extra,
                    },
                ) from exc
            except LoopError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            store.checkpoint(session_id)
            return {
                "next_display": _display_payload(session, session_pool[session_id]),
                "metrics": _metrics_payload(session),
                "done": session.done,
            }

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        session = _get_session(session_id)
        with store.session_lock(session_id):
            records = session.history.records
            return {
                "iteration": session.iteration,
                "samp_pct": records[-1].samp_pct if records else 0.0,
                "eer_history": [
                    {
                        "iteration": r.iteration,
                        "samp_pct": r.samp_pct,
                        "eer": r.test_eer,
                        "reward": r.reward,
                        "display_size": r.display_size,
                    }
                    for r in records
                ],
                "q_values": records[-1].q_values if records else None,
                "current_display": _display_payload(
                    session, session_pool[session_id]
                ),
                "ladder": {
                    "current": session.ladder.current,
                    "min_size": session.ladder.min_size,
                    "max_size": session.ladder.max_size,
                    "step": session.ladder.step,
                },
                "budget": {
                    "max_labels": session.budget.max_labels,
                    "used": session.budget.used,
                },
                "done": session.done,
            }

    @app.get("/sessions/{session_id}/runlog", response_class=PlainTextResponse)
    def session_runlog(session_id: str):
        session = _get_session(session_id)
        with store.session_lock(session_id):
            return session.history.to_jsonl()

    @app.get("/pools/{pool_id}/items/{item_id}/{which}.png")
    def item_image(pool_id: str, item_id: int, which: str):
        if pool_id not in store.pools:
            raise HTTPException(status_code=404, detail="unknown pool")
        if which not in ("before", "after"):
            raise HTTPException(status_code=404, detail="unknown image kind")
        try:
            item = store.pools[pool_id].item(item_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown item") from None
        if item.image_refs is None:
            raise HTTPException(status_code=404, detail="item has no images")
        path = item.image_refs[0 if which == "before" else 1]
        if not os.path.exists(path):
            raise HTTPException(status_code=404, detail="image file missing")
        return FileResponse(path)

    if frontend_dir and os.path.isdir(frontend_dir):
        app.mount(
            "/ui", StaticFiles(directory=frontend_dir, html=True), name="ui"
        )

    return app
