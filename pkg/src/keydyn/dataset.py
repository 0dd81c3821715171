"""Dataset file format and the synthetic typist generator.

The canonical on-disk format is line-delimited JSON, UTF-8, LF endings:
line 1 is a header `{"password": ..., "metadata": {...}}`, every later line
is one capture attempt. Timing values carry at most three decimal places so
round-trips are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from keydyn.capture import CaptureAttempt, KeyEvent, PRESS, RELEASE


class DatasetError(Exception):
    """Raised on unreadable or inconsistent dataset files."""


@dataclass(frozen=True)
class Dataset:
    password: str
    attempts: tuple[CaptureAttempt, ...]
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SynthProfile:
    """Per-user typing profile used by the synthetic generator."""

    user_id: str
    digraph_means_ms: tuple[float, ...]  # press-to-press latency per digraph
    hold_means_ms: tuple[float, ...]  # hold time per character
    noise_std_ms: float
    session_drift: float  # multiplier applied per extra session
    typo_probability: float

    def __post_init__(self) -> None:
        if any(m <= 0 for m in self.digraph_means_ms + self.hold_means_ms):
            raise ValueError("latency means must be positive")
        if self.noise_std_ms < 0 or self.session_drift <= 0:
            raise ValueError("noise std must be >= 0 and drift > 0")
        if not 0.0 <= self.typo_probability <= 1.0:
            raise ValueError("typo probability must be in [0, 1]")


def _attempt_to_record(attempt: CaptureAttempt) -> dict[str, Any]:
    return {
        "user_id": attempt.user_id,
        "session_id": attempt.session_id,
        "attempt_index": attempt.attempt_index,
        "target_text": attempt.target_text,
        "typed_text": attempt.typed_text,
        "events": [
            {"key": e.key_label, "action": e.action, "t_ms": round(e.t_ms, 3)}
            for e in attempt.events
        ],
    }


def _record_to_attempt(record: dict[str, Any], line_no: int) -> CaptureAttempt:
    for name in ("user_id", "session_id", "attempt_index", "target_text", "typed_text", "events"):
        if name not in record:
            raise DatasetError(f"line {line_no}: missing field {name!r}")
    events = []
    for i, ev in enumerate(record["events"]):
        for name in ("key", "action", "t_ms"):
            if name not in ev:
                raise DatasetError(f"line {line_no}: event {i} missing field {name!r}")
        if ev["action"] not in (PRESS, RELEASE):
            raise DatasetError(f"line {line_no}: event {i} has bad action {ev['action']!r}")
        events.append(KeyEvent(ev["key"], ev["action"], float(ev["t_ms"])))
    return CaptureAttempt(
        user_id=str(record["user_id"]),
        session_id=str(record["session_id"]),
        attempt_index=int(record["attempt_index"]),
        target_text=str(record["target_text"]),
        typed_text=str(record["typed_text"]),
        events=tuple(events),
    )


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    lines = [json.dumps({"password": dataset.password, "metadata": dataset.metadata}, sort_keys=True)]
    for attempt in dataset.attempts:
        if attempt.target_text != dataset.password:
            raise DatasetError(
                f"attempt {attempt.user_id}/{attempt.session_id}/{attempt.attempt_index}: "
                "target_text differs from the dataset password"
            )
        lines.append(json.dumps(_attempt_to_record(attempt)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise DatasetError("empty_dataset")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetError(f"line 1: bad header: {exc}") from exc
    if "password" not in header:
        raise DatasetError("line 1: missing field 'password'")
    password = str(header["password"])
    metadata = dict(header.get("metadata", {}))

    attempts: list[CaptureAttempt] = []
    seen: set[tuple[str, str, int]] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"line {line_no}: bad record: {exc}") from exc
        attempt = _record_to_attempt(record, line_no)
        key = (attempt.user_id, attempt.session_id, attempt.attempt_index)
        if key in seen:
            raise DatasetError(f"line {line_no}: duplicate attempt {key}")
        seen.add(key)
        if attempt.target_text != password:
            raise DatasetError(f"line {line_no}: target_text differs from the dataset password")
        _check_event_structure(attempt, line_no)
        attempts.append(attempt)
    return Dataset(password=password, attempts=tuple(attempts), metadata=metadata)


def _check_event_structure(attempt: CaptureAttempt, line_no: int) -> None:
    open_presses: dict[str, int] = {}
    prev = float("-inf")
    for i, ev in enumerate(attempt.events):
        if ev.t_ms < 0 or ev.t_ms < prev:
            raise DatasetError(f"line {line_no}: malformed_events (event {i} out of order)")
        prev = ev.t_ms
        if ev.action == PRESS:
            open_presses[ev.key_label] = open_presses.get(ev.key_label, 0) + 1
        else:
            if open_presses.get(ev.key_label, 0) == 0:
                raise DatasetError(
                    f"line {line_no}: malformed_events (event {i}: release before its press)"
                )
            open_presses[ev.key_label] -= 1


def draw_profile(
    user_id: str,
    password: str,
    rng: np.random.Generator,
    noise_std_ms: float = 10.0,
    typo_probability: float = 0.0,
) -> SynthProfile:
    """Draw one user's typing profile.

    Per-digraph means are spread over a wide range so distinct users are
    separable; the drift factor below 1 models typing speedup across
    sessions.
    """
    n = len(password)
    return SynthProfile(
        user_id=user_id,
        digraph_means_ms=tuple(rng.uniform(100.0, 320.0, size=n - 1)),
        hold_means_ms=tuple(rng.uniform(60.0, 140.0, size=n)),
        noise_std_ms=noise_std_ms,
        session_drift=float(rng.uniform(0.9, 1.0)),
        typo_probability=typo_probability,
    )


def _synth_events(
    text: str,
    profile: SynthProfile,
    drift: float,
    rng: np.random.Generator,
) -> tuple[KeyEvent, ...]:
    n = len(text)
    press = [0.0] * n
    for i in range(1, n):
        gap = max(1.0, rng.normal(profile.digraph_means_ms[i - 1] * drift, profile.noise_std_ms))
        press[i] = press[i - 1] + gap
    release = [
        press[i] + max(1.0, rng.normal(profile.hold_means_ms[i] * drift, profile.noise_std_ms))
        for i in range(n)
    ]
    events = []
    for i, ch in enumerate(text):
        label = "space" if ch == " " else ch
        events.append(KeyEvent(label, PRESS, round(press[i], 3)))
        events.append(KeyEvent(label, RELEASE, round(release[i], 3)))
    # Stable sort keeps press-before-release order on equal timestamps.
    return tuple(sorted(events, key=lambda e: e.t_ms))


def _typo_text(password: str, rng: np.random.Generator) -> str:
    chars = list(password)
    i = int(rng.integers(0, len(chars) - 1))
    if chars[i] != chars[i + 1]:
        chars[i], chars[i + 1] = chars[i + 1], chars[i]
    else:
        chars[i] = "x" if chars[i] != "x" else "y"
    return "".join(chars)


def generate_synthetic(
    n_users: int = 16,
    n_sessions: int = 3,
    attempts_per_session: int = 5,
    password: str = "laboratoire greyc",
    seed: int = 42,
    noise_std_ms: float = 10.0,
    typo_probability: float = 0.0,
) -> Dataset:
    """Generate a deterministic synthetic capture dataset.

    Each user types `attempts_per_session` *valid* attempts per session;
    with probability `typo_probability` a text-mismatch attempt is emitted
    first and retried, which exercises the failure-to-acquire path.
    """
    if n_users < 2:
        raise ValueError("n_users must be >= 2 (evaluation needs impostors)")
    if n_sessions < 1 or attempts_per_session < 1:
        raise ValueError("n_sessions and attempts_per_session must be >= 1")
    if len(password) < 2:
        raise ValueError("password must have length >= 2")
    if not 0.0 <= typo_probability <= 0.95:
        raise ValueError("typo_probability must be in [0, 0.95]")

    rng = np.random.default_rng(seed)
    attempts: list[CaptureAttempt] = []
    for ui in range(n_users):
        user_id = f"user{ui:02d}"
        profile = draw_profile(user_id, password, rng, noise_std_ms, typo_probability)
        for si in range(1, n_sessions + 1):
            session_id = f"s{si:02d}"
            drift = profile.session_drift ** (si - 1)
            attempt_index = 0
            for _ in range(attempts_per_session):
                while rng.random() < profile.typo_probability:
                    typed = _typo_text(password, rng)
                    attempts.append(
                        CaptureAttempt(
                            user_id=user_id,
                            session_id=session_id,
                            attempt_index=attempt_index,
                            target_text=password,
                            typed_text=typed,
                            events=_synth_events(typed, profile, drift, rng),
                        )
                    )
                    attempt_index += 1
                attempts.append(
                    CaptureAttempt(
                        user_id=user_id,
                        session_id=session_id,
                        attempt_index=attempt_index,
                        target_text=password,
                        typed_text=password,
                        events=_synth_events(password, profile, drift, rng),
                    )
                )
                attempt_index += 1
    metadata = {
        "generator": "keydyn-synthetic",
        "seed": seed,
        "n_users": n_users,
        "n_sessions": n_sessions,
        "attempts_per_session": attempts_per_session,
        "noise_std_ms": noise_std_ms,
        "typo_probability": typo_probability,
    }
    return Dataset(password=password, attempts=tuple(attempts), metadata=metadata)
