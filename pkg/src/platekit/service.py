"""HTTP session service: exposes the elicitation loop to a browser UI.

Each live session wraps one SessionEngine behind a per-session lock, so
concurrent sessions never block on each other's planner runs. When a
pre-computed plan cache holds several restarts for a grid point, the
presented arrangement is a seeded random pick among them, and the catalog
shows the lowest-cost one.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .planner import PlanCache
from .render import RenderedScene, render
from .session import METHOD_NAIVE, METHOD_PCPBO, SessionConfig, SessionEngine
from .tasks import TaskDefinition, load_task


class CreateSessionRequest(BaseModel):
    task: str
    method: str = METHOD_PCPBO
    N: int = Field(default=50, ge=1)
    seed: int = 0
    mode: str = "synth"
    n_init: int = 1


class AnswerRequest(BaseModel):
    choice: str
    query_index: int | None = None


class LikertRequest(BaseModel):
    q1: int = Field(ge=1, le=7)
    q2: int = Field(ge=1, le=7)
    q3: int = Field(ge=1, le=7)
    q4: int = Field(ge=1, le=7)


class ReferenceRequest(BaseModel):
    w: list[float]


_CHOICES = {"left": 0, "right": 1, "skip": None}


class LiveSession:
    def __init__(self, session_id: str, task: TaskDefinition, engine: SessionEngine,
                 seed: int):
        self.id = session_id
        self.task = task
        self.engine = engine
        self.seed = seed
        self.lock = threading.Lock()
        self.reference_index: int | None = None
        self.likert: list[dict] = []
        self.answered = False

    def render_state(self, index: int, reference: bool = False) -> RenderedScene:
        state = self.engine.realize(index)
        return render(state, "oblique", self.task.plate_radius, reference=reference)


def create_app(cache_root: str | Path | None = None,
               log_dir: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="platekit session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    sessions: dict[str, LiveSession] = {}
    sessions_lock = threading.Lock()
    cache = PlanCache(cache_root)
    log_dir_path = Path(log_dir) if log_dir is not None else None
    if log_dir_path is not None:
        log_dir_path.mkdir(parents=True, exist_ok=True)
    app.state.sessions = sessions
    app.state.log_dir = log_dir_path

    def get_session(session_id: str) -> LiveSession:
        with sessions_lock:
            live = sessions.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return live

    def pick_restart(live: LiveSession, index: int) -> None:
        """Pin a seeded-random cached restart for presentation, if any."""
        seeds = cache.cached_seeds(live.task, index)
        if not seeds:
            return
        rng = np.random.default_rng(
            np.random.SeedSequence((live.seed, 777, live.engine.query_index, index))
        )
        chosen = int(seeds[int(rng.integers(len(seeds)))])
        cem = replace(live.engine.cfg.cem, seed=chosen)
        live.engine.provide_state(index, cache.get_or_plan(live.task, index, cem).best_state)

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        method = {"pcpbo": METHOD_PCPBO, "naive": METHOD_NAIVE}.get(req.method, req.method)
        try:
            task = load_task(req.task)
            cfg = SessionConfig(
                method=method, n_queries=req.N, n_init=req.n_init,
                synthesis_mode=req.mode, seed=req.seed,
            )
        except (ValueError, FileNotFoundError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        session_id = uuid.uuid4().hex[:12]
        log_path = (
            log_dir_path / f"session_{session_id}.jsonl" if log_dir_path else None
        )
        engine = SessionEngine(task, cfg, plan_cache=cache, log_path=log_path)
        with sessions_lock:
            sessions[session_id] = LiveSession(session_id, task, engine, req.seed)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        live = get_session(session_id)
        with live.lock:
            if live.engine.finished():
                return {"done": True, "query_index": live.engine.query_index}
            i0, i1 = live.engine.ensure_pair()
            pick_restart(live, i0)
            pick_restart(live, i1)
            qi, i0, i1, s0, s1 = live.engine.next_query()
            ref = None
            if live.reference_index is not None:
                ref = live.render_state(live.reference_index, reference=True).to_dict()
            return {
                "done": False,
                "query_index": qi,
                "left": live.render_state(i0).to_dict(),
                "right": live.render_state(i1).to_dict(),
                "reference": ref,
            }

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, req: AnswerRequest):
        live = get_session(session_id)
        if req.choice not in _CHOICES:
            raise HTTPException(status_code=422, detail=f"invalid choice {req.choice!r}")
        with live.lock:
            if live.engine.finished():
                raise HTTPException(status_code=409, detail="session complete")
            if live.engine._outstanding is None:
                raise HTTPException(status_code=409, detail="no outstanding query")
            if req.query_index is not None and req.query_index != live.engine.query_index:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale query index {req.query_index}, "
                    f"current is {live.engine.query_index}",
                )
            try:
                live.engine.submit_answer(_CHOICES[req.choice])
            except ValueError as e:
                raise HTTPException(status_code=422, detail=str(e))
            live.answered = True
            return {"accepted": True, "next_available": not live.engine.finished()}

    @app.get("/sessions/{session_id}/estimate")
    def get_estimate(session_id: str):
        live = get_session(session_id)
        with live.lock:
            engine = live.engine
            if engine.estimates:
                idx = engine.estimates[-1]
                rendered = live.render_state(idx).to_dict()
            else:
                idx = None
                rendered = None
            return {
                "w": list(engine.grid.point(idx)) if idx is not None else None,
                "rendered": rendered,
                "trajectory": [list(engine.grid.point(i)) for i in engine.estimates],
                "query_index": engine.query_index,
                "n_queries": engine.cfg.n_queries,
                "done": engine.finished(),
            }

    @app.post("/sessions/{session_id}/likert")
    def post_likert(session_id: str, req: LikertRequest):
        live = get_session(session_id)
        with live.lock:
            record = {"q1": req.q1, "q2": req.q2, "q3": req.q3, "q4": req.q4}
            live.likert.append(record)
            live.engine.log_event({"type": "likert", **record})
            return {"stored": True, "count": len(live.likert)}

    @app.get("/sessions/{session_id}/catalog")
    def get_catalog(session_id: str):
        live = get_session(session_id)
        with live.lock:
            task = live.task
            out = []
            for idx in range(len(task.grid)):
                seeds = cache.cached_seeds(task, idx)
                if seeds:
                    results = [
                        cache.get_or_plan(task, idx, replace(live.engine.cfg.cem, seed=s))
                        for s in seeds
                    ]
                    best = min(results, key=lambda r: r.best_cost)
                    live.engine.provide_state(idx, best.best_state)
                state = live.engine.realize(idx)
                out.append(
                    {
                        "index": idx,
                        "w": list(task.grid.point(idx)),
                        "rendered": render(
                            state, "oblique", task.plate_radius
                        ).to_dict(),
                    }
                )
            return {"candidates": out}

    @app.post("/sessions/{session_id}/reference")
    def post_reference(session_id: str, req: ReferenceRequest):
        live = get_session(session_id)
        with live.lock:
            if len(req.w) != live.task.n_w:
                raise HTTPException(status_code=422, detail="wrong weight dimension")
            idx = live.task.grid.index_of(req.w)
            live.reference_index = idx
            live.engine.log_event({"type": "reference", "index": idx,
                                   "w": list(live.task.grid.point(idx))})
            return {"pinned": True, "index": idx, "w": list(live.task.grid.point(idx))}

    return app
