from __future__ import annotations

import numpy as np
import pytest

from keydyn.capture import CaptureAttempt, KeyEvent, PRESS, RELEASE


def make_attempt(
    text: str,
    press_times: list[float],
    release_times: list[float],
    typed_text: str | None = None,
    user_id: str = "u1",
    session_id: str = "s01",
    attempt_index: int = 0,
) -> CaptureAttempt:
    """Build an attempt from per-character press/release timestamps."""
    events = []
    for ch, p, r in zip(text, press_times, release_times):
        label = "space" if ch == " " else ch
        events.append(KeyEvent(label, PRESS, p))
        events.append(KeyEvent(label, RELEASE, r))
    events.sort(key=lambda e: e.t_ms)
    return CaptureAttempt(
        user_id=user_id,
        session_id=session_id,
        attempt_index=attempt_index,
        target_text=text,
        typed_text=typed_text if typed_text is not None else text,
        events=tuple(events),
    )


def random_attempt(rng: np.random.Generator, text: str = "secret pw") -> CaptureAttempt:
    """Random well-formed attempt with timestamps on a 2^-10 ms grid.

    Dyadic timestamps keep every latency difference exact in binary
    floating point, so identities like PP = RP + PR hold with no rounding.
    """
    n = len(text)
    quantum = 1.0 / 1024.0
    t = 0.0
    press, release = [], []
    for i in range(n):
        press.append(t)
        hold = int(rng.integers(20, 200 * 1024)) * quantum
        release.append(t + hold)
        t += int(rng.integers(1024, 400 * 1024)) * quantum  # next press, >= 1 ms later
    return make_attempt(text, press, release)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
