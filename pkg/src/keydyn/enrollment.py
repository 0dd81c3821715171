"""User models and the three enrollment-update modes.

A model holds the enrolled vector set (oldest first) plus its mean and
population standard deviation. Three update policies exist:

    static       model never changes after enrollment
    adaptive     FIFO sliding window: drop the oldest, append the new vector
    progressive  unbounded: append the new vector

Models are immutable; update_model returns a new model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

MODES = ("static", "adaptive", "progressive")


@dataclass(frozen=True)
class UserModel:
    user_id: str
    template_kind: str
    method_id: str
    mode: str
    enrolled: tuple[tuple[float, ...], ...]  # oldest first
    mean: tuple[float, ...]
    std: tuple[float, ...]  # population std (divide by N)
    window: int


def _stats(vectors: Sequence[Sequence[float]]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    arr = np.asarray(vectors, dtype=float)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)  # ddof=0
    return tuple(float(x) for x in mean), tuple(float(x) for x in std)


def enroll(
    user_id: str,
    vectors: Sequence[Sequence[float]],
    kind: str,
    method: str,
    mode: str,
) -> UserModel:
    """Build a model from enrollment vectors (reference setup: five)."""
    if len(vectors) == 0:
        raise ValueError("enrollment requires at least one vector")
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    enrolled = tuple(tuple(float(x) for x in v) for v in vectors)
    dims = {len(v) for v in enrolled}
    if len(dims) != 1:
        raise ValueError(f"ragged enrollment dimensions: {sorted(dims)}")
    mean, std = _stats(enrolled)
    return UserModel(
        user_id=user_id,
        template_kind=kind,
        method_id=method,
        mode=mode,
        enrolled=enrolled,
        mean=mean,
        std=std,
        window=len(enrolled),
    )


def update_model(model: UserModel, new_vector: Sequence[float]) -> UserModel:
    """Apply one genuine vector to the model under its update mode.

    Callers only pass vectors deemed genuine; impostor attempts never
    mutate a model.
    """
    vec = tuple(float(x) for x in new_vector)
    if len(vec) != len(model.mean):
        raise ValueError(f"dimension mismatch: {len(vec)} != {len(model.mean)}")
    if model.mode == "static":
        return model
    if model.mode == "adaptive":
        enrolled = model.enrolled[1:] + (vec,)
    elif model.mode == "progressive":
        enrolled = model.enrolled + (vec,)
    else:
        raise ValueError(f"unknown mode: {model.mode!r}")
    mean, std = _stats(enrolled)
    return replace(model, enrolled=enrolled, mean=mean, std=std)
