"""Offline evaluation: score replay, ROC/EER metrics, and the flavor grid.

A flavor is one (method, template kind, enrollment mode) combination. The
default grid is {M1..M4} x {PP,RR,RP,PR,V} x {static,adaptive,progressive},
60 flavors; M5 can be added by flag.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Sequence

import numpy as np

from keydyn.capture import (
    TEMPLATE_KINDS,
    CaptureAttempt,
    TimingTemplate,
    extract_template,
    filter_outlier,
    validate_attempt,
)
from keydyn.dataset import Dataset
from keydyn.enrollment import MODES, UserModel, enroll, update_model
from keydyn.matchers import METHOD_IDS, score_model

DEFAULT_METHODS = ("M1", "M2", "M3", "M4")
DEFAULT_ENROLL_COUNT = 5

REPORT_CSV_HEADER = "method,template,mode,eer_global,eer_per_user,n_genuine,n_impostor"
ROC_CSV_HEADER = "threshold,far,frr"


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class Flavor:
    method_id: str
    template_kind: str
    mode: str


@dataclass(frozen=True)
class ScoreSample:
    claimed_user: str
    source_user: str
    score: float

    @property
    def genuine(self) -> bool:
        return self.claimed_user == self.source_user


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    far: float
    frr: float


@dataclass
class ScoreCollection:
    samples: list[ScoreSample]
    warnings: list[str] = field(default_factory=list)


@dataclass
class ReportRow:
    flavor: Flavor
    eer_global: float | None
    eer_per_user: float | None
    n_genuine: int
    n_impostor: int
    error: str | None = None
    best: bool = False


@dataclass
class EvaluationReport:
    rows: list[ReportRow]
    dataset_descriptor: dict[str, Any]
    config: dict[str, Any]


def _templates_by_user(
    dataset: Dataset, kind: str, outlier_filter: bool
) -> dict[str, list[TimingTemplate]]:
    """Valid attempts per user, chronological, extracted to templates."""
    per_user: dict[str, list[CaptureAttempt]] = {}
    for attempt in dataset.attempts:
        if validate_attempt(attempt).acquired:
            per_user.setdefault(attempt.user_id, []).append(attempt)
    out: dict[str, list[TimingTemplate]] = {}
    for user_id in sorted(per_user):
        attempts = sorted(per_user[user_id], key=lambda a: (a.session_id, a.attempt_index))
        templates = [extract_template(a, kind) for a in attempts]
        if outlier_filter:
            templates = [t for t in templates if filter_outlier(t)]
        out[user_id] = templates
    return out


def _collect_from_templates(
    templates: dict[str, list[TimingTemplate]],
    flavor: Flavor,
    impostor_pool: str,
    enroll_count: int,
) -> ScoreCollection:
    warnings: list[str] = []
    usable = {
        u: tpls for u, tpls in templates.items() if len(tpls) >= enroll_count + 1
    }
    for user_id in sorted(set(templates) - set(usable)):
        warnings.append(
            f"user {user_id} excluded: {len(templates[user_id])} valid templates "
            f"< {enroll_count + 1} required"
        )

    samples: list[ScoreSample] = []
    snapshots: dict[str, UserModel] = {}
    for user_id, tpls in usable.items():
        vectors = [t.values for t in tpls]
        model = enroll(user_id, vectors[:enroll_count], flavor.template_kind, flavor.method_id, flavor.mode)
        # Genuine replay in chronological order; updates fire on every
        # genuine-labeled vector since the decision threshold is swept later.
        for v in vectors[enroll_count:]:
            samples.append(ScoreSample(user_id, user_id, score_model(model, v).value))
            model = update_model(model, v)
        snapshots[user_id] = model

    for claimed, model in snapshots.items():
        for other, tpls in usable.items():
            if other == claimed:
                continue
            pool = tpls if impostor_pool == "all_vectors" else tpls[enroll_count:]
            for t in pool:
                samples.append(ScoreSample(claimed, other, score_model(model, t.values).value))
    return ScoreCollection(samples=samples, warnings=warnings)


def collect_scores(
    dataset: Dataset,
    flavor: Flavor,
    impostor_pool: str = "test_only",
    enroll_count: int = DEFAULT_ENROLL_COUNT,
    outlier_filter: bool = False,
) -> ScoreCollection:
    """Replay the dataset through one flavor and collect labeled scores.

    Per user: enroll on the first `enroll_count` valid templates, replay the
    rest as genuine probes (updating the model per the flavor's mode), then
    score every other user's pool templates as impostors against the frozen
    post-replay model. Impostors never mutate models.
    """
    if impostor_pool not in ("test_only", "all_vectors"):
        raise ValueError(f"unknown impostor pool: {impostor_pool!r}")
    templates = _templates_by_user(dataset, flavor.template_kind, outlier_filter)
    return _collect_from_templates(templates, flavor, impostor_pool, enroll_count)


def compute_roc(samples: Sequence[ScoreSample]) -> list[RocPoint]:
    """Sweep every observed score (plus -inf/+inf) as an accept threshold."""
    genuine = np.sort([s.score for s in samples if s.genuine])
    impostor = np.sort([s.score for s in samples if not s.genuine])
    if genuine.size == 0 or impostor.size == 0:
        raise EvaluationError("insufficient_classes")
    thresholds = [float("-inf")]
    thresholds.extend(sorted(set(float(s.score) for s in samples)))
    thresholds.append(float("inf"))
    points = []
    for theta in thresholds:
        far = float(np.searchsorted(impostor, theta, side="right")) / impostor.size
        frr = float(genuine.size - np.searchsorted(genuine, theta, side="right")) / genuine.size
        points.append(RocPoint(threshold=theta, far=far, frr=frr))
    return points


def compute_eer(roc: Sequence[RocPoint]) -> tuple[float, float]:
    """EER at the threshold minimizing |FAR - FRR| (ties: smaller threshold)."""
    best = min(roc, key=lambda p: (abs(p.far - p.frr), p.threshold))
    return (best.far + best.frr) / 2.0, best.threshold


def eer_global(samples: Sequence[ScoreSample]) -> float:
    """EER over the pooled samples (one shared threshold)."""
    return compute_eer(compute_roc(samples))[0]


def eer_per_user(samples: Sequence[ScoreSample]) -> float:
    """Unweighted mean of per-user EERs (each user gets their own threshold).

    Users lacking either a genuine or impostor sample are skipped.
    """
    by_user: dict[str, list[ScoreSample]] = {}
    for s in samples:
        by_user.setdefault(s.claimed_user, []).append(s)
    eers = []
    for user in sorted(by_user):
        try:
            eers.append(compute_eer(compute_roc(by_user[user]))[0])
        except EvaluationError:
            continue
    if not eers:
        raise EvaluationError("insufficient_classes")
    return float(np.mean(eers))


def run_grid(
    dataset: Dataset,
    methods: Sequence[str] = DEFAULT_METHODS,
    template_kinds: Sequence[str] = TEMPLATE_KINDS,
    modes: Sequence[str] = MODES,
    impostor_pool: str = "test_only",
    enroll_count: int = DEFAULT_ENROLL_COUNT,
    outlier_filter: bool = False,
) -> EvaluationReport:
    """Evaluate every flavor in the cartesian product.

    Per-flavor errors are recorded in the row; the run continues. The row
    with the minimum global EER is flagged as best.
    """
    for m in methods:
        if m not in METHOD_IDS:
            raise ValueError(f"unknown method: {m!r}")
    for k in template_kinds:
        if k not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind: {k!r}")
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode: {mode!r}")

    template_cache = {
        kind: _templates_by_user(dataset, kind, outlier_filter) for kind in template_kinds
    }
    rows: list[ReportRow] = []
    for method, kind, mode in product(methods, template_kinds, modes):
        flavor = Flavor(method, kind, mode)
        try:
            collection = _collect_from_templates(
                template_cache[kind], flavor, impostor_pool, enroll_count
            )
            samples = collection.samples
            n_gen = sum(1 for s in samples if s.genuine)
            n_imp = len(samples) - n_gen
            rows.append(
                ReportRow(
                    flavor=flavor,
                    eer_global=eer_global(samples),
                    eer_per_user=eer_per_user(samples),
                    n_genuine=n_gen,
                    n_impostor=n_imp,
                )
            )
        except (EvaluationError, ValueError) as exc:
            rows.append(ReportRow(flavor=flavor, eer_global=None, eer_per_user=None,
                                  n_genuine=0, n_impostor=0, error=str(exc)))
    scored = [r for r in rows if r.eer_global is not None]
    if scored:
        best = min(scored, key=lambda r: r.eer_global)
        best.best = True
    return EvaluationReport(
        rows=rows,
        dataset_descriptor={
            "password": dataset.password,
            "n_attempts": len(dataset.attempts),
            "n_users": len({a.user_id for a in dataset.attempts}),
            "metadata": dict(dataset.metadata),
        },
        config={
            "methods": list(methods),
            "template_kinds": list(template_kinds),
            "modes": list(modes),
            "impostor_pool": impostor_pool,
            "enroll_count": enroll_count,
            "outlier_filter": outlier_filter,
        },
    )


def report_to_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    buf.write(REPORT_CSV_HEADER + "\n")
    for row in report.rows:
        eg = "" if row.eer_global is None else f"{row.eer_global:.6f}"
        ep = "" if row.eer_per_user is None else f"{row.eer_per_user:.6f}"
        buf.write(
            f"{row.flavor.method_id},{row.flavor.template_kind},{row.flavor.mode},"
            f"{eg},{ep},{row.n_genuine},{row.n_impostor}\n"
        )
    return buf.getvalue()


def roc_to_csv(roc: Sequence[RocPoint]) -> str:
    buf = io.StringIO()
    buf.write(ROC_CSV_HEADER + "\n")
    for p in roc:
        theta = "-inf" if p.threshold == float("-inf") else (
            "inf" if p.threshold == float("inf") else f"{p.threshold:.6f}"
        )
        buf.write(f"{theta},{p.far:.6f},{p.frr:.6f}\n")
    return buf.getvalue()


def identify(
    probe: TimingTemplate | Sequence[float],
    models: Sequence[UserModel],
) -> tuple[str, float]:
    """1:N search: the enrolled user whose model scores lowest on the probe.

    Ties break toward the lexicographically smallest user id.
    """
    if not models:
        raise EvaluationError("no models to identify against")
    kinds = {m.template_kind for m in models}
    methods = {m.method_id for m in models}
    if len(kinds) != 1 or len(methods) != 1:
        raise EvaluationError("models disagree on template kind or method")
    values = getattr(probe, "values", probe)
    scored = sorted((score_model(m, values).value, m.user_id) for m in models)
    score, user_id = scored[0]
    return user_id, score
