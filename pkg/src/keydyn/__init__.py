"""Keystroke-dynamics authentication toolkit."""

from keydyn.capture import (
    CaptureAttempt,
    KeyEvent,
    TimingTemplate,
    extract_template,
    filter_outlier,
    fta_rate,
    validate_attempt,
)
from keydyn.enrollment import UserModel, enroll, update_model
from keydyn.matchers import (
    Decision,
    Score,
    decide,
    score_m1,
    score_m2,
    score_m3,
    score_m4,
    score_m5,
    score_model,
)

__all__ = [
    "CaptureAttempt",
    "KeyEvent",
    "TimingTemplate",
    "extract_template",
    "filter_outlier",
    "fta_rate",
    "validate_attempt",
    "UserModel",
    "enroll",
    "update_model",
    "Decision",
    "Score",
    "decide",
    "score_m1",
    "score_m2",
    "score_m3",
    "score_m4",
    "score_m5",
    "score_model",
]
