"""Command-line front door: synth / eval / roc / extract / serve.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
All outputs are CSV or the line-delimited dataset format.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from keydyn.capture import TEMPLATE_KINDS, extract_template, validate_attempt
from keydyn.dataset import DatasetError, generate_synthetic, load_dataset, save_dataset
from keydyn.enrollment import MODES
from keydyn.evaluation import (
    DEFAULT_METHODS,
    Flavor,
    collect_scores,
    compute_roc,
    report_to_csv,
    roc_to_csv,
    run_grid,
)
from keydyn.matchers import METHOD_IDS


def _split_csv_list(value: str, allowed: tuple[str, ...], what: str) -> list[str]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    for item in items:
        if item not in allowed:
            raise click.BadParameter(f"unknown {what}: {item!r} (allowed: {', '.join(allowed)})")
    if not items:
        raise click.BadParameter(f"no {what} given")
    return items


def _load_dataset_or_fail(path: str):
    p = Path(path)
    if not p.exists():
        raise click.UsageError(f"dataset file not found: {path}")
    try:
        return load_dataset(p)
    except DatasetError as exc:
        raise click.UsageError(f"cannot load {path}: {exc}")


@click.group()
def main() -> None:
    """Keystroke-dynamics toolkit: evaluate, export ROC, generate data, serve."""


@main.command("synth")
@click.option("--n-users", default=16, show_default=True, help="Number of synthetic users.")
@click.option("--n-sessions", default=3, show_default=True, help="Sessions per user.")
@click.option("--attempts-per-session", default=5, show_default=True,
              help="Valid attempts per user per session.")
@click.option("--password", default="laboratoire greyc", show_default=True,
              help="Shared password every attempt types.")
@click.option("--seed", default=42, show_default=True, help="RNG seed; output is deterministic.")
@click.option("--noise-std", default=10.0, show_default=True,
              help="Within-user timing noise std (ms).")
@click.option("--typo-probability", default=0.0, show_default=True,
              help="Probability an attempt is emitted as a typo and retried.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output dataset path.")
def cmd_synth(n_users, n_sessions, attempts_per_session, password, seed,
              noise_std, typo_probability, out_path) -> None:
    """Generate a synthetic capture dataset."""
    try:
        dataset = generate_synthetic(
            n_users=n_users,
            n_sessions=n_sessions,
            attempts_per_session=attempts_per_session,
            password=password,
            seed=seed,
            noise_std_ms=noise_std,
            typo_probability=typo_probability,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    save_dataset(dataset, out_path)
    click.echo(f"wrote {len(dataset.attempts)} attempts to {out_path}")


@main.command("eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(), help="Dataset file.")
@click.option("--methods", default=",".join(DEFAULT_METHODS), show_default=True,
              help="Comma-separated scoring methods.")
@click.option("--templates", default=",".join(TEMPLATE_KINDS), show_default=True,
              help="Comma-separated template kinds.")
@click.option("--modes", default=",".join(MODES), show_default=True,
              help="Comma-separated enrollment modes.")
@click.option("--impostor-pool", default="test_only", show_default=True,
              type=click.Choice(["test_only", "all_vectors"]),
              help="Which templates of other users serve as impostor probes.")
@click.option("--include-m5", is_flag=True, help="Add M5 to the method grid.")
@click.option("--outlier-filter", is_flag=True,
              help="Drop templates with inter-key latencies above 500 ms.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Report CSV path.")
def cmd_eval(dataset_path, methods, templates, modes, impostor_pool,
             include_m5, outlier_filter, out_path) -> None:
    """Evaluate every (method, template, mode) flavor; write the EER table."""
    method_list = _split_csv_list(methods, METHOD_IDS, "method")
    if include_m5 and "M5" not in method_list:
        method_list.append("M5")
    kinds = _split_csv_list(templates, TEMPLATE_KINDS, "template kind")
    mode_list = _split_csv_list(modes, MODES, "mode")
    data = _load_dataset_or_fail(dataset_path)
    try:
        report = run_grid(
            data,
            methods=method_list,
            template_kinds=kinds,
            modes=mode_list,
            impostor_pool=impostor_pool,
            outlier_filter=outlier_filter,
        )
    except Exception as exc:
        raise click.ClickException(str(exc))
    Path(out_path).write_text(report_to_csv(report), encoding="utf-8", newline="\n")
    best = [r for r in report.rows if r.best]
    click.echo(f"wrote {len(report.rows)} rows to {out_path}")
    if best:
        b = best[0]
        click.echo(
            f"best flavor: {b.flavor.method_id}/{b.flavor.template_kind}/{b.flavor.mode} "
            f"eer_global={b.eer_global:.6f} eer_per_user={b.eer_per_user:.6f}"
        )


@main.command("roc")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(), help="Dataset file.")
@click.option("--method", required=True, type=click.Choice(METHOD_IDS), help="Scoring method.")
@click.option("--template", required=True, type=click.Choice(TEMPLATE_KINDS),
              help="Template kind.")
@click.option("--mode", required=True, type=click.Choice(MODES), help="Enrollment mode.")
@click.option("--impostor-pool", default="test_only", show_default=True,
              type=click.Choice(["test_only", "all_vectors"]))
@click.option("--out", "out_path", required=True, type=click.Path(), help="ROC CSV path.")
def cmd_roc(dataset_path, method, template, mode, impostor_pool, out_path) -> None:
    """Export the threshold/FAR/FRR sweep for one flavor."""
    data = _load_dataset_or_fail(dataset_path)
    try:
        collection = collect_scores(data, Flavor(method, template, mode), impostor_pool)
        roc = compute_roc(collection.samples)
    except Exception as exc:
        raise click.ClickException(str(exc))
    Path(out_path).write_text(roc_to_csv(roc), encoding="utf-8", newline="\n")
    click.echo(f"wrote {len(roc)} ROC points to {out_path}")


@main.command("extract")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(), help="Dataset file.")
@click.option("--kind", required=True, type=click.Choice(TEMPLATE_KINDS), help="Template kind.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Feature CSV path.")
def cmd_extract(dataset_path, kind, out_path) -> None:
    """Write one CSV row of template values per valid attempt."""
    data = _load_dataset_or_fail(dataset_path)
    rows = []
    width = None
    for attempt in data.attempts:
        if not validate_attempt(attempt).acquired:
            continue
        template = extract_template(attempt, kind)
        width = len(template.values)
        values = ",".join(f"{v:.6f}" for v in template.values)
        rows.append(f"{attempt.user_id},{attempt.session_id},{attempt.attempt_index},{values}")
    if width is None:
        raise click.ClickException("dataset contains no valid attempts")
    header = "user_id,session_id,attempt_index," + ",".join(f"v{i}" for i in range(width))
    Path(out_path).write_text(header + "\n" + "\n".join(rows) + "\n",
                              encoding="utf-8", newline="\n")
    click.echo(f"wrote {len(rows)} rows to {out_path}")


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Service config JSON (password, storage_path, method, threshold, ...).")
def cmd_serve(config_path) -> None:
    """Run the enroll/verify/identify HTTP service until interrupted."""
    import uvicorn

    from keydyn.service import ServiceConfig, create_app

    p = Path(config_path)
    if not p.exists():
        raise click.UsageError(f"config file not found: {config_path}")
    try:
        config = ServiceConfig.from_file(p)
    except (ValueError, TypeError, KeyError) as exc:
        raise click.UsageError(f"bad config {config_path}: {exc}")
    host, _, port = config.listen_address.partition(":")
    try:
        uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8000))
    except SystemExit:
        raise
    except OSError as exc:
        raise click.ClickException(f"cannot serve on {config.listen_address}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
