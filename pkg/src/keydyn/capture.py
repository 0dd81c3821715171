"""Raw keystroke capture attempts and timing-template extraction.

An attempt is one full entry of a fixed password: a stream of press/release
events with millisecond timestamps. Valid attempts (typed text matches the
target exactly, events structurally sound) yield timing templates built from
four latency families:

    PP  press  -> next press
    RR  release -> next release
    RP  release -> next press   (may be negative under key rollover)
    PR  press  -> release of the same key (hold time, always positive)
    V   concatenation PP || RR || RP || PR
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

PRESS = "press"
RELEASE = "release"

TEMPLATE_KINDS = ("PP", "RR", "RP", "PR", "V")

# Non-character labels recognised by the capture layer. Anything else that is
# not a single character is treated as a modifier and ignored for extraction.
_LABEL_TO_CHAR = {
    "space": " ",
    "Space": " ",
    " ": " ",
}


def char_for_label(key_label: str) -> str | None:
    """Map a key label to the character it types, or None for modifiers."""
    if len(key_label) == 1:
        return key_label
    return _LABEL_TO_CHAR.get(key_label)


@dataclass(frozen=True)
class KeyEvent:
    key_label: str
    action: str  # "press" | "release"
    t_ms: float


@dataclass(frozen=True)
class CaptureAttempt:
    user_id: str
    session_id: str
    attempt_index: int
    target_text: str
    typed_text: str
    events: tuple[KeyEvent, ...]


@dataclass(frozen=True)
class TimingTemplate:
    kind: str  # one of TEMPLATE_KINDS
    values: tuple[float, ...]
    source: tuple[str, str, int]  # (user_id, session_id, attempt_index)


@dataclass(frozen=True)
class ValidationResult:
    acquired: bool
    reason: str | None = None  # "text_mismatch" | "malformed_events"


ACQUIRED = ValidationResult(True)
TEXT_MISMATCH = ValidationResult(False, "text_mismatch")
MALFORMED_EVENTS = ValidationResult(False, "malformed_events")


def rebase_events(events: Iterable[KeyEvent]) -> tuple[KeyEvent, ...]:
    """Shift timestamps so the first event sits at t_ms = 0."""
    evs = tuple(events)
    if not evs:
        return evs
    t0 = evs[0].t_ms
    if t0 == 0:
        return evs
    return tuple(KeyEvent(e.key_label, e.action, e.t_ms - t0) for e in evs)


def _match_press_release(events: Sequence[KeyEvent]) -> list[tuple[KeyEvent, KeyEvent]] | None:
    """Pair each press with its release, FIFO per key label.

    Returns None when the structure is broken (release without a pending
    press, or a press never released).
    """
    open_presses: dict[str, list[int]] = {}
    pairs: list[tuple[KeyEvent, KeyEvent | None]] = []
    for ev in events:
        if ev.action == PRESS:
            open_presses.setdefault(ev.key_label, []).append(len(pairs))
            pairs.append((ev, None))
        elif ev.action == RELEASE:
            pending = open_presses.get(ev.key_label)
            if not pending:
                return None
            idx = pending.pop(0)
            pairs[idx] = (pairs[idx][0], ev)
        else:
            return None
    if any(rel is None for _, rel in pairs):
        return None
    return pairs  # type: ignore[return-value]


def validate_attempt(attempt: CaptureAttempt) -> ValidationResult:
    """Decide whether an attempt is acquired or a failure-to-acquire.

    No correction is allowed: the typed text must equal the target text
    character for character. Event structure must be well-formed: sorted,
    non-negative timestamps, every press matched by a later release, and the
    character presses must spell the typed text in order.
    """
    if attempt.typed_text != attempt.target_text:
        return TEXT_MISMATCH

    events = attempt.events
    if not events:
        return ACQUIRED if attempt.typed_text == "" else MALFORMED_EVENTS

    prev = 0.0
    for ev in events:
        if ev.t_ms < 0 or ev.t_ms < prev:
            return MALFORMED_EVENTS
        prev = ev.t_ms

    pairs = _match_press_release(events)
    if pairs is None:
        return MALFORMED_EVENTS

    typed_chars = [
        c
        for c in (char_for_label(p.key_label) for p, _ in pairs)
        if c is not None
    ]
    if "".join(typed_chars) != attempt.typed_text:
        return MALFORMED_EVENTS

    return ACQUIRED


def _press_release_times(attempt: CaptureAttempt) -> tuple[list[float], list[float]]:
    pairs = _match_press_release(attempt.events)
    assert pairs is not None  # guaranteed by validate_attempt
    presses: list[float] = []
    releases: list[float] = []
    for press, release in pairs:
        if char_for_label(press.key_label) is None:
            continue  # modifier keys carry no template component
        presses.append(press.t_ms)
        releases.append(release.t_ms)
    return presses, releases


def extract_template(attempt: CaptureAttempt, kind: str) -> TimingTemplate:
    """Extract one timing template from a valid attempt.

    For password length n: |PP| = |RR| = |RP| = n - 1, |PR| = n and
    |V| = 4n - 3.
    """
    if kind not in TEMPLATE_KINDS:
        raise ValueError(f"unknown template kind: {kind!r}")
    result = validate_attempt(attempt)
    if not result.acquired:
        raise ValueError(f"cannot extract from non-acquired attempt ({result.reason})")
    n = len(attempt.target_text)
    if n < 2:
        raise ValueError("password too short: no digraph exists for n < 2")

    p, r = _press_release_times(attempt)
    pp = [p[i + 1] - p[i] for i in range(n - 1)]
    rr = [r[i + 1] - r[i] for i in range(n - 1)]
    rp = [p[i + 1] - r[i] for i in range(n - 1)]
    pr = [r[i] - p[i] for i in range(n)]

    source = (attempt.user_id, attempt.session_id, attempt.attempt_index)
    if kind == "PP":
        values = pp
    elif kind == "RR":
        values = rr
    elif kind == "RP":
        values = rp
    elif kind == "PR":
        values = pr
    else:  # V
        values = pp + rr + rp + pr
    return TimingTemplate(kind=kind, values=tuple(values), source=source)


def filter_outlier(template: TimingTemplate, max_latency_ms: float = 500.0) -> bool:
    """Return True to keep the template, False to reject it.

    Rejects when any inter-key component (PP, RR, RP) is strictly greater
    than max_latency_ms. PR hold times are exempt. Disabled by default in
    all pipelines.
    """
    if template.kind == "PR":
        return True
    if template.kind == "V":
        # V = PP || RR || RP || PR with |V| = 4n - 3; the last n entries
        # are the exempt PR block.
        n = (len(template.values) + 3) // 4
        inter_key = template.values[: 3 * (n - 1)]
    else:
        inter_key = template.values
    return all(v <= max_latency_ms for v in inter_key)


def fta_rate(attempts: Sequence[CaptureAttempt]) -> float:
    """Fraction of attempts that fail acquisition (typos, broken streams)."""
    if not attempts:
        raise ValueError("empty_input")
    failures = sum(1 for a in attempts if not validate_attempt(a).acquired)
    return failures / len(attempts)
