"""HTTP service for live enrollment, verification and identification.

State is one JSON document per user under the configured storage directory,
written atomically (temp file + rename) so a crash never leaves a half
record. All state transitions for one user are serialized behind a per-user
lock; distinct users proceed in parallel.

The service itself carries no API authentication: it is the experiment.
Deployments must front it with their own access control.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from keydyn.capture import (
    CaptureAttempt,
    KeyEvent,
    extract_template,
    filter_outlier,
    rebase_events,
    validate_attempt,
)
from keydyn.enrollment import UserModel, enroll, update_model
from keydyn.evaluation import EvaluationError, identify
from keydyn.matchers import decide, score_model

_USER_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass
class ServiceConfig:
    password: str
    storage_path: str
    method_id: str = "M2"
    template_kind: str = "V"
    mode: str = "adaptive"
    threshold: float = 0.28
    enrollment_count: int = 5
    outlier_filter: bool = False
    listen_address: str = "127.0.0.1:8000"

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.enrollment_count < 1:
            raise ValueError("enrollment_count must be >= 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)


@dataclass
class UserRecord:
    user_id: str
    pending: list[list[float]] = field(default_factory=list)
    model: UserModel | None = None
    fta_count: int = 0
    attempt_count: int = 0

    @property
    def state(self) -> str:
        return "active" if self.model is not None else "enrolling"

    def summary(self, enrollment_count: int) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "state": self.state,
            "enrolled": len(self.pending) if self.model is None else len(self.model.enrolled),
            "enrollment_count": enrollment_count,
            "fta_count": self.fta_count,
            "attempt_count": self.attempt_count,
        }


class UserStore:
    """Per-user JSON persistence with atomic writes."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, user_id: str) -> Path:
        return self.root / f"{user_id}.json"

    def load_all(self) -> dict[str, UserRecord]:
        records = {}
        for p in sorted(self.root.glob("*.json")):
            records[p.stem] = self._from_dict(json.loads(p.read_text(encoding="utf-8")))
        return records

    def save(self, record: UserRecord) -> None:
        doc = {
            "user_id": record.user_id,
            "pending": record.pending,
            "model": None if record.model is None else asdict(record.model),
            "fta_count": record.fta_count,
            "attempt_count": record.attempt_count,
        }
        target = self.path(record.user_id)
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc), encoding="utf-8")
        tmp.replace(target)

    @staticmethod
    def _from_dict(doc: dict[str, Any]) -> UserRecord:
        model = None
        if doc.get("model") is not None:
            m = doc["model"]
            model = UserModel(
                user_id=m["user_id"],
                template_kind=m["template_kind"],
                method_id=m["method_id"],
                mode=m["mode"],
                enrolled=tuple(tuple(v) for v in m["enrolled"]),
                mean=tuple(m["mean"]),
                std=tuple(m["std"]),
                window=m["window"],
            )
        return UserRecord(
            user_id=doc["user_id"],
            pending=[list(v) for v in doc.get("pending", [])],
            model=model,
            fta_count=doc.get("fta_count", 0),
            attempt_count=doc.get("attempt_count", 0),
        )


class EventBody(BaseModel):
    key: str
    action: Literal["press", "release"]
    t_ms: float


class CreateUserBody(BaseModel):
    user_id: str = Field(min_length=1)


class AttemptBody(BaseModel):
    phase: Literal["enroll", "verify"]
    typed_text: str
    events: list[EventBody]


class IdentifyBody(BaseModel):
    typed_text: str
    events: list[EventBody]


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="keydyn auth service")
    store = UserStore(config.storage_path)
    users: dict[str, UserRecord] = store.load_all()
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def user_lock(user_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(user_id, threading.Lock())

    def build_attempt(user_id: str, typed_text: str, events: list[EventBody],
                      attempt_index: int) -> CaptureAttempt:
        evs = rebase_events(
            KeyEvent(e.key, e.action, e.t_ms) for e in events
        )
        return CaptureAttempt(
            user_id=user_id,
            session_id="live",
            attempt_index=attempt_index,
            target_text=config.password,
            typed_text=typed_text,
            events=evs,
        )

    def acquire_template(attempt: CaptureAttempt):
        """Returns (template, None) or (None, fta_reason)."""
        result = validate_attempt(attempt)
        if not result.acquired:
            return None, result.reason
        template = extract_template(attempt, config.template_kind)
        if config.outlier_filter and not filter_outlier(template):
            return None, "outlier"
        return template, None

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/users", status_code=201)
    def create_user(body: CreateUserBody) -> dict[str, Any]:
        user_id = body.user_id
        if not _USER_ID_RE.match(user_id):
            raise HTTPException(422, detail="user_id must match [A-Za-z0-9._-]+")
        with user_lock(user_id):
            if user_id in users:
                raise HTTPException(409, detail="user already exists")
            record = UserRecord(user_id=user_id)
            users[user_id] = record
            store.save(record)
            return record.summary(config.enrollment_count)

    @app.get("/users/{user_id}")
    def get_user(user_id: str) -> dict[str, Any]:
        record = users.get(user_id)
        if record is None:
            raise HTTPException(404, detail="unknown user")
        return record.summary(config.enrollment_count)

    @app.post("/users/{user_id}/attempts")
    def submit_attempt(user_id: str, body: AttemptBody) -> dict[str, Any]:
        with user_lock(user_id):
            record = users.get(user_id)
            if record is None:
                raise HTTPException(404, detail="unknown user")
            if body.phase == "enroll" and record.state != "enrolling":
                raise HTTPException(409, detail="invalid_state: user already active")
            if body.phase == "verify" and record.state != "active":
                raise HTTPException(409, detail="invalid_state: user still enrolling")

            attempt = build_attempt(user_id, body.typed_text, body.events,
                                    record.attempt_count)
            record.attempt_count += 1
            template, fta_reason = acquire_template(attempt)
            if template is None:
                record.fta_count += 1
                store.save(record)
                return {"outcome": "fta", "reason": fta_reason}

            if body.phase == "enroll":
                record.pending.append(list(template.values))
                if len(record.pending) >= config.enrollment_count:
                    record.model = enroll(
                        user_id, record.pending, config.template_kind,
                        config.method_id, config.mode,
                    )
                    record.pending = []
                    store.save(record)
                    return {"outcome": "active"}
                store.save(record)
                return {
                    "outcome": f"enrolled_{len(record.pending)}_of_{config.enrollment_count}",
                    "enrolled": len(record.pending),
                    "enrollment_count": config.enrollment_count,
                }

            assert record.model is not None
            score = score_model(record.model, template.values)
            decision = decide(score, config.threshold)
            if decision.accepted and config.mode != "static":
                record.model = update_model(record.model, template.values)
            store.save(record)
            return {
                "outcome": "decision",
                "score": score.value,
                "accepted": decision.accepted,
                "threshold": config.threshold,
            }

    @app.post("/identify")
    def identify_attempt(body: IdentifyBody) -> dict[str, Any]:
        models = [r.model for r in users.values() if r.model is not None]
        if not models:
            raise HTTPException(409, detail="no active users")
        attempt = build_attempt("", body.typed_text, body.events, 0)
        template, fta_reason = acquire_template(attempt)
        if template is None:
            raise HTTPException(422, detail=f"failure to acquire: {fta_reason}")
        try:
            user_id, score = identify(template, models)
        except EvaluationError as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        return {
            "user_id": user_id,
            "score": score,
            "accepted": score <= config.threshold,
        }

    return app
