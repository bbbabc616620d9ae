"""Session-oriented HTTP service over the interaction loop.

Each session owns one preference state and at most one pending summary; the
client alternates GET summary -> POST feedback, mirroring the simulator's
round structure exactly.  Sessions persist as append-only JSON-lines event
logs and are replayed on access, so a restarted service resumes every
session with an identical estimate and pending summary.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .preference import (
    AspectProfileConfig,
    alignment_metrics,
    state_from_json,
    state_to_json,
    uniform_state,
)
from .selection import MODE_DETERMINISTIC, MODE_GUMBEL, SelectionConfig
from .session import ProductCatalog, RoundArtifacts, SessionEngine
from .simulate import FeedbackOracle
from .summarize import dominant_aspect


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class SessionCreate(BaseModel):
    products: list[str] | None = None
    seed: int = 0
    mode: str = MODE_GUMBEL
    lam: float = 0.7
    max_sentences: int = 8
    max_tokens: int | None = None
    c_beta: float = 2.0
    beta_max: float = 50.0
    eta0: float = 0.5
    c_eta: float = 1.0
    baseline_kind: str = "ema"
    ema_rho: float = 0.1
    clip_c: float = 1.0
    delta_floor: float = 1e-4
    weight_scheme: str = "uniform"
    beta_alpha: float = 1.0
    gamma_alpha: float = 1.0


class FeedbackBody(BaseModel):
    summary_id: str
    f: float


@dataclass
class LiveSession:
    session_id: str
    engine: SessionEngine
    created_at: str
    config: dict
    pending: dict | None = None  # cached SummaryResponse JSON
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """Append-only JSON-lines event log per session."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, event: dict) -> None:
        with self.path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()

    def events(self, session_id: str) -> list[dict]:
        p = self.path(session_id)
        if not p.exists():
            return []
        out = []
        with p.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        return out


def _selection_config(cfg: SessionCreate, seed: int) -> SelectionConfig:
    if cfg.mode not in (MODE_DETERMINISTIC, MODE_GUMBEL):
        raise ApiError(400, "invalid_mode", f"unknown selection mode {cfg.mode!r}")
    return SelectionConfig(
        lam=cfg.lam,
        max_sentences=cfg.max_sentences,
        max_tokens=cfg.max_tokens,
        mode=cfg.mode,
        c_beta=cfg.c_beta,
        beta_max=cfg.beta_max,
        seed=seed,
    )


def _build_engine(catalog: ProductCatalog, cfg: SessionCreate) -> SessionEngine:
    products = cfg.products if cfg.products else catalog.product_ids
    for pid in products:
        if pid not in catalog.candidates:
            raise ApiError(400, "unknown_product", f"unknown product id {pid!r}")
    state = uniform_state(
        catalog.k,
        eta0=cfg.eta0,
        c_eta=cfg.c_eta,
        baseline_kind=cfg.baseline_kind,
        ema_rho=cfg.ema_rho,
        clip_c=cfg.clip_c,
        delta_floor=cfg.delta_floor,
    )
    profile_cfg = AspectProfileConfig(
        scheme=cfg.weight_scheme,
        beta_alpha=cfg.beta_alpha,
        gamma_alpha=cfg.gamma_alpha,
    )
    return SessionEngine(
        catalog,
        list(products),
        _selection_config(cfg, cfg.seed),
        state,
        profile_cfg=profile_cfg,
        online=True,
    )


def _summary_response(
    session: LiveSession,
    art: RoundArtifacts,
    summary_id: str,
    catalog: ProductCatalog,
    oracle: FeedbackOracle | None,
) -> dict:
    bins_by_sid = {}
    for name, ids in art.summary.provenance.items():
        for sid in ids:
            bins_by_sid[sid] = name
    selected = [
        {
            "sentence_id": sid,
            "text": catalog.text_by_id[sid],
            "aspect": dominant_aspect(catalog.phi_by_id[sid]),
            "bin": bins_by_sid.get(sid, "mid"),
        }
        for sid in art.selected.sentence_ids
    ]
    doc = {
        "summary_id": summary_id,
        "round": art.round,
        "product_id": art.product_id,
        "final": art.summary.final,
        "bin_summaries": art.summary.bin_summaries,
        "selected": selected,
        "z": art.z.tolist(),
        "w_hat": session.engine.state.w_hat.tolist(),
        "g_cos": art.summary.g_cos,
        "degraded": art.summary.degraded,
    }
    if oracle is not None:
        w_true = oracle.preference_at(art.round)
        a_pref, a_evid = alignment_metrics(w_true, session.engine.state.w_hat, art.z)
        doc["a_pref"] = a_pref
        doc["a_evid"] = a_evid
    return doc


def _state_response(session: LiveSession) -> dict:
    return {
        "session_id": session.session_id,
        "round": session.engine.round,
        "w_hat": session.engine.state.w_hat.tolist(),
        "baseline": session.engine.state.baseline_value,
        "pending_summary_id": session.pending["summary_id"] if session.pending else None,
        "history": list(session.history),
        "created_at": session.created_at,
    }


def create_app(
    catalog: ProductCatalog,
    store: SessionStore,
    demo_oracle: FeedbackOracle | None = None,
) -> FastAPI:
    app = FastAPI(title="prefer service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, LiveSession] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "validation", "message": str(exc.errors())},
        )

    def _replay(session_id: str) -> LiveSession | None:
        events = store.events(session_id)
        if not events or events[0].get("event") != "created":
            return None
        created = events[0]
        cfg = SessionCreate(**created["config"])
        engine = _build_engine(catalog, cfg)
        session = LiveSession(
            session_id=session_id,
            engine=engine,
            created_at=created["created_at"],
            config=created["config"],
        )
        for event in events[1:]:
            if event["event"] == "summary":
                session.pending = event["response"]
            elif event["event"] == "feedback":
                engine.state = state_from_json(event["state"])
                engine.round = int(event["round"]) + 1
                session.pending = None
                session.history.append(
                    {
                        "round": int(event["round"]),
                        "summary_id": event["summary_id"],
                        "f": event["f"],
                    }
                )
        return session

    def _get_session(session_id: str) -> LiveSession:
        with registry_lock:
            session = sessions.get(session_id)
            if session is None:
                session = _replay(session_id)
                if session is None:
                    raise ApiError(404, "unknown_session", f"unknown session {session_id!r}")
                sessions[session_id] = session
            return session

    @app.post("/sessions")
    def create_session(body: SessionCreate):
        engine = _build_engine(catalog, body)
        session_id = uuid.uuid4().hex
        created_at = datetime.now(timezone.utc).isoformat()
        session = LiveSession(
            session_id=session_id,
            engine=engine,
            created_at=created_at,
            config=body.model_dump(),
        )
        with registry_lock:
            sessions[session_id] = session
        store.append(session_id, {"event": "created", "config": body.model_dump(), "created_at": created_at})
        return {"session_id": session_id, "round": engine.round, "w_hat": engine.state.w_hat.tolist()}

    @app.get("/sessions/{session_id}/summary")
    def next_summary(session_id: str):
        session = _get_session(session_id)
        with session.lock:
            if session.pending is not None:
                return session.pending
            art = session.engine.run_selection()
            summary_id = uuid.uuid4().hex
            response = _summary_response(session, art, summary_id, catalog, demo_oracle)
            session.pending = response
            store.append(
                session_id,
                {"event": "summary", "round": art.round, "summary_id": summary_id, "response": response},
            )
            return response

    @app.post("/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: FeedbackBody):
        session = _get_session(session_id)
        with session.lock:
            if session.pending is None:
                raise ApiError(409, "no_pending_summary", "no summary is awaiting feedback")
            if body.summary_id != session.pending["summary_id"]:
                raise ApiError(
                    409,
                    "stale_summary",
                    f"summary {body.summary_id!r} is not the pending one",
                )
            if not 0.0 <= body.f <= 1.0:
                raise ApiError(400, "invalid_feedback", "f must lie in [0, 1]")
            round_t = session.engine.round
            z = np.asarray(session.pending["z"], dtype=np.float64)
            outcome = session.engine.apply_round_feedback(body.f, z)
            session.history.append(
                {"round": round_t, "summary_id": body.summary_id, "f": body.f}
            )
            summary_id = session.pending["summary_id"]
            session.pending = None
            store.append(
                session_id,
                {
                    "event": "feedback",
                    "round": round_t,
                    "summary_id": summary_id,
                    "f": body.f,
                    "f_tilde": outcome.f_tilde,
                    "state": state_to_json(session.engine.state),
                },
            )
            return {
                "round": session.engine.round,
                "w_hat": session.engine.state.w_hat.tolist(),
                "f_tilde": outcome.f_tilde,
                "baseline": session.engine.state.baseline_value,
            }

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str):
        session = _get_session(session_id)
        with session.lock:
            return _state_response(session)

    return app
