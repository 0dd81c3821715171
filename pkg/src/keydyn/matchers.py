"""The five dissimilarity scores and the threshold decision rule.

All methods return a dissimilarity: 0 means a perfect match, larger means
less similar. A probe is accepted when its score is <= the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from keydyn.enrollment import UserModel

METHOD_IDS = ("M1", "M2", "M3", "M4", "M5")

# Floor on each std component in M2: with five enrollment vectors a component
# can have zero deviation, which would divide by zero.
SIGMA_MIN = 1.0
# Guard on M5's per-component denominator: a unit-mean component can be 0.
M5_EPS = 1e-12


@dataclass(frozen=True)
class Score:
    value: float
    method_id: str


@dataclass(frozen=True)
class Decision:
    score: Score
    threshold: float
    accepted: bool


def _vec(x: Sequence[float] | np.ndarray) -> np.ndarray:
    values = getattr(x, "values", x)  # accepts TimingTemplate or raw vectors
    return np.asarray(values, dtype=float)


def _check_dims(*vectors: np.ndarray) -> int:
    dims = {v.shape for v in vectors}
    if len(dims) != 1 or vectors[0].ndim != 1:
        raise ValueError(f"dimension mismatch: {[v.shape for v in vectors]}")
    return vectors[0].shape[0]


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("degenerate_vector")
    if norm == 1.0:
        return v
    return v / norm


def score_m1(v, u) -> Score:
    """Euclidean distance normalized by both vector norms."""
    v, u = _vec(v), _vec(u)
    _check_dims(v, u)
    nv, nu = float(np.linalg.norm(v)), float(np.linalg.norm(u))
    if nv == 0.0 or nu == 0.0:
        raise ValueError("degenerate_vector")
    return Score(float(np.linalg.norm(v - u)) / (nv * nu), "M1")


def score_m2(v, u, s) -> Score:
    """Statistical score from the mean and std vectors; result in [0, 1)."""
    v, u, s = _vec(v), _vec(u), _vec(s)
    n = _check_dims(v, u, s)
    s = np.maximum(s, SIGMA_MIN)
    value = 1.0 - float(np.sum(np.exp(-((v - u) ** 2) / s**2))) / n
    return Score(value, "M2")


def score_m3(v, enrolled) -> Score:
    """Minimum Euclidean distance to any individual enrolled vector."""
    v = _vec(v)
    vectors = [_vec(e) for e in enrolled]
    if not vectors:
        raise ValueError("empty enrolled set")
    _check_dims(v, *vectors)
    value = min(float(np.linalg.norm(e - v)) for e in vectors)
    return Score(value, "M3")


def score_m4(v, u) -> Score:
    """Squared Euclidean distance to the mean vector."""
    v, u = _vec(v), _vec(u)
    _check_dims(v, u)
    d = v - u
    return Score(float(np.dot(d, d)), "M4")


def score_m5(v, enrolled) -> Score:
    """Distance between unit vectors, weighted per component.

    The reference direction is the unit-normed mean of the unit-normed
    enrolled vectors. Both sides pass through the same two-step
    normalization so a single-vector self-match is exactly 0.
    """
    v = _vec(v)
    vectors = [_vec(e) for e in enrolled]
    if not vectors:
        raise ValueError("empty enrolled set")
    _check_dims(v, *vectors)
    u_hat = _unit(np.mean([_unit(e) for e in vectors], axis=0))
    v_hat = _unit(_unit(v))
    value = float(np.sqrt(np.sum((u_hat - v_hat) ** 2 / np.maximum(u_hat**2, M5_EPS))))
    return Score(value, "M5")


def decide(score: Score, threshold: float) -> Decision:
    """Accept iff the dissimilarity is <= the threshold (ties accept)."""
    return Decision(score=score, threshold=threshold, accepted=score.value <= threshold)


def score_model(model: "UserModel", v) -> Score:
    """Score a probe vector against an enrolled model with its own method."""
    method = model.method_id
    if method == "M1":
        return score_m1(v, model.mean)
    if method == "M2":
        return score_m2(v, model.mean, model.std)
    if method == "M3":
        return score_m3(v, model.enrolled)
    if method == "M4":
        return score_m4(v, model.mean)
    if method == "M5":
        return score_m5(v, model.enrolled)
    raise ValueError(f"unknown method: {method!r}")
