"""Command-line pipeline: each stage reads artifacts, writes artifacts + manifests.

Every flag can be supplied through the environment with a ``WLINGAM_`` prefix
(e.g. ``WLINGAM_FIT_PANEL``). All randomness flows from explicit ``--seed``
flags. Exit codes: 0 success, 1 input/validation failure, 2 runtime failure.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import __version__
from .bootstrap import BootstrapConfig, run_bootstrap
from .effects import (
    build_stacked,
    default_guidance_queries,
    guidance_effect_table,
    total_effect,
    write_effects_csv,
)
from .errors import (
    ArtifactError,
    IngestionError,
    MaskError,
    OutOfRange,
    SchemaError,
    WlingamError,
)
from .fixtures import demo_dir
from .manifest import write_manifest
from .mask import PKMask, build_default_mask, default_block_order, validate_mask
from .model import LongitudinalModel, fit
from .motif import extract_motif
from .panel import PanelSchema, default_screening_schema, emit_long_csv, ingest_long_csv, write_meta
from .simulator import EffectBundle, SimQuery, Simulator, UnknownVariable, build_bundle

_VALIDATION_ERRORS = (
    click.ClickException,
    IngestionError,
    SchemaError,
    MaskError,
    OutOfRange,
    ArtifactError,
    UnknownVariable,
    FileNotFoundError,
)


def _load_schema(spec: str) -> PanelSchema:
    if spec == "screening-default":
        return default_screening_schema()
    with open(spec, encoding="utf-8") as fh:
        return PanelSchema.from_dict(json.load(fh))


def _parse_horizons(raw: str) -> list[int]:
    try:
        return [int(x) for x in raw.split(",") if x != ""]
    except ValueError:
        raise click.ClickException(f"invalid horizon list {raw!r}") from None


def _artifact_dir(value: str) -> str:
    return demo_dir() if value == "demo" else value


@click.group(context_settings={"auto_envvar_prefix": "WLINGAM"})
@click.version_option(__version__)
def cli():
    """Workflow-constrained longitudinal causal discovery pipeline."""


@cli.command()
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True))
@click.option("--schema", required=True, help="schema JSON path or 'screening-default'")
@click.option("--out", "out_dir", required=True, type=click.Path())
def ingest(csv_path, schema, out_dir):
    """Read a long-format CSV into a dense panel; write meta + normalized CSV."""
    panel = ingest_long_csv(csv_path, _load_schema(schema))
    os.makedirs(out_dir, exist_ok=True)
    meta = os.path.join(out_dir, "panel.meta.json")
    write_meta(panel, meta)
    normalized = os.path.join(out_dir, "panel.csv")
    emit_long_csv(panel, normalized)
    write_manifest(meta, {"csv": csv_path})
    write_manifest(normalized, {"csv": csv_path})
    click.echo(
        f"ingested {panel.n_subjects} subjects "
        f"({panel.dropped_subjects} dropped as incomplete) -> {out_dir}"
    )


@cli.command()
@click.option("--schema", required=True, help="schema JSON path or 'screening-default'")
@click.option("--background", default="", help="comma-separated background variable names")
@click.option("--out", "out_path", required=True, type=click.Path())
def mask(schema, background, out_path):
    """Build and validate the default workflow constraint mask."""
    sch = _load_schema(schema)
    bg = tuple(x for x in background.split(",") if x)
    pk = build_default_mask(sch, default_block_order(sch, background=bg))
    report = validate_mask(pk, sch)
    if not report.ok:
        raise MaskError("; ".join(v.message for v in report.violations))
    pk.save(out_path)
    inputs = {} if schema == "screening-default" else {"schema": schema}
    write_manifest(out_path, inputs)
    click.echo(f"wrote admissible mask -> {out_path}")


@cli.command()
@click.option("--spec", default="canonical", type=click.Choice(["canonical"]))
@click.option("--n", "n_subjects", default=20000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--noise-scale", default=0.45, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth(spec, n_subjects, seed, noise_scale, out_dir):
    """Generate a ground-truth panel plus its mask and true effects."""
    from .synth import canonical_spec, generate

    gen_spec = canonical_spec(n_subjects=n_subjects, seed=seed, noise_scale=noise_scale)
    result = generate(gen_spec)
    os.makedirs(out_dir, exist_ok=True)
    panel_csv = os.path.join(out_dir, "panel.csv")
    emit_long_csv(result.panel, panel_csv)
    write_meta(result.panel, os.path.join(out_dir, "panel.meta.json"))
    pk = build_default_mask(
        gen_spec.schema, default_block_order(gen_spec.schema, background=("Age", "Sex"))
    )
    mask_path = os.path.join(out_dir, "mask.json")
    pk.save(mask_path)
    truth = {
        "true_model": gen_spec.true_model.to_dict(),
        "true_effects": [
            {
                "source": list(e.source),
                "target": list(e.target),
                "lag": e.lag,
                "value": e.value,
            }
            for e in result.true_effects
        ],
        "warnings": list(result.warnings),
    }
    truth_path = os.path.join(out_dir, "truth.json")
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for path in (panel_csv, mask_path, truth_path):
        write_manifest(path, {}, seed=seed)
    click.echo(f"generated {n_subjects} subjects (seed {seed}) -> {out_dir}")


@cli.command("fit")
@click.option("--panel", "panel_csv", required=True, type=click.Path(exists=True))
@click.option("--mask", "mask_path", required=True, type=click.Path(exists=True))
@click.option("--include-auxiliary", is_flag=True, default=False)
@click.option("--out", "out_path", required=True, type=click.Path())
def fit_cmd(panel_csv, mask_path, include_auxiliary, out_path):
    """Fit the constrained longitudinal model."""
    pk = PKMask.load(mask_path)
    panel = ingest_long_csv(panel_csv, pk.schema)
    model = fit(panel, pk, include_auxiliary=include_auxiliary)
    model.save(out_path)
    write_manifest(out_path, {"panel": panel_csv, "mask": mask_path})
    if model.degenerate_columns:
        click.echo(f"dropped constant columns: {', '.join(model.degenerate_columns)}")
    click.echo(f"fitted model -> {out_path}")


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--anchor", default=1, show_default=True)
@click.option("--horizons", default="0,1,2", show_default=True)
@click.option("--include-auxiliary", is_flag=True, default=False)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@click.option("--out", "out_path", required=True, type=click.Path())
def effects(model_path, anchor, horizons, include_auxiliary, fmt, out_path):
    """Lagged intervention total effects from a fitted model."""
    model = LongitudinalModel.load(model_path)
    sys_ = build_stacked(model, include_auxiliary=include_auxiliary)
    lags = _parse_horizons(horizons)
    table = guidance_effect_table(sys_, anchor, lags)
    if fmt == "json":
        doc = {
            "source": list(table["source"]),
            "outcomes": table["outcomes"],
            "horizons": table["horizons"],
            "anchor_labels": table["anchor_labels"],
            "values": table["values"].tolist(),
        }
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        queries = default_guidance_queries(model.schema, anchor, lags)
        rows = [total_effect(sys_, src, dst) for src, dst in queries]
        write_effects_csv(out_path, rows)
    write_manifest(out_path, {"model": model_path})
    click.echo(f"wrote effects table -> {out_path}")


@cli.command()
@click.option("--panel", "panel_csv", required=True, type=click.Path(exists=True))
@click.option("--mask", "mask_path", required=True, type=click.Path(exists=True))
@click.option("--b", "--B", "n_replicates", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ci-level", default=0.95, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--anchor", default=1, show_default=True)
@click.option("--horizons", default="0,1,2", show_default=True)
@click.option("--all-sources", is_flag=True, default=False, help="bootstrap every variable pair")
@click.option("--include-auxiliary", is_flag=True, default=False)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--draws-out", default=None, type=click.Path())
@click.option("--bundle-out", default=None, type=click.Path(), help="also emit a simulator bundle")
def bootstrap(
    panel_csv,
    mask_path,
    n_replicates,
    seed,
    ci_level,
    workers,
    anchor,
    horizons,
    all_sources,
    include_auxiliary,
    out_path,
    draws_out,
    bundle_out,
):
    """Subject-level bootstrap intervals for lagged total effects."""
    pk = PKMask.load(mask_path)
    panel = ingest_long_csv(panel_csv, pk.schema)
    lags = _parse_horizons(horizons)
    schema = pk.schema
    if all_sources or bundle_out:
        names = schema.names
        sources = [n for i, n in enumerate(names) if i != schema.baseline_index]
        targets = [names[j] for j in schema.outcome_indices]
        queries = [
            ((s, anchor), (t, anchor + lag)) for s in sources for t in targets for lag in lags
        ]
        for lag in lags:
            if anchor + lag >= schema.n_times:
                raise OutOfRange(f"horizon {lag} reaches beyond the panel (T={schema.n_times})")
    else:
        queries = default_guidance_queries(schema, anchor, lags)
    config = BootstrapConfig(
        n_replicates=n_replicates, seed=seed, ci_level=ci_level, workers=workers
    )
    summary = run_bootstrap(panel, pk, config, queries, include_auxiliary=include_auxiliary)
    summary.save(out_path, draws_path=draws_out)
    write_manifest(out_path, {"panel": panel_csv, "mask": mask_path}, seed=seed)
    if bundle_out:
        model = fit(panel, pk, include_auxiliary=include_auxiliary)
        bundle = build_bundle(model, summary, anchor, lags)
        bundle.save(bundle_out)
        write_manifest(bundle_out, {"panel": panel_csv, "mask": mask_path}, seed=seed)
        click.echo(f"wrote bundle -> {bundle_out}")
    click.echo(
        f"bootstrap B={n_replicates} done ({summary.excluded_replicates} degenerate) -> {out_path}"
    )


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.01, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dot", "dot_path", default=None, type=click.Path())
def motif(model_path, threshold, out_path, dot_path):
    """Recurring within-time subgraph over the outcomes."""
    model = LongitudinalModel.load(model_path)
    m = extract_motif(model, edge_threshold=threshold)
    m.save(out_path)
    write_manifest(out_path, {"model": model_path})
    if dot_path:
        with open(dot_path, "w", encoding="utf-8") as fh:
            fh.write(m.to_dot())
    click.echo(
        f"motif: {len(m.directed)} directed, {len(m.undirected)} undirected -> {out_path}"
    )


@cli.command()
@click.option("--artifacts", required=True, help="artifact directory or 'demo'")
@click.option("--mode", required=True, type=click.Choice(["forward", "goal"]))
@click.option("--baseline", "baseline_path", required=True, type=click.Path(exists=True))
@click.option("--source", required=True)
@click.option("--target", required=True)
@click.option("--horizon", default=0, show_default=True)
@click.option("--value", default=None, type=float, help="hypothetical source value (forward)")
@click.option("--desired", default=None, type=float, help="desired target value (goal)")
def simulate(artifacts, mode, baseline_path, source, target, horizon, value, desired):
    """Answer one what-if or goal-seeking query from precomputed artifacts."""
    art = _artifact_dir(artifacts)
    model = LongitudinalModel.load(os.path.join(art, "model.json"))
    bundle = EffectBundle.load(os.path.join(art, "bundle.json"))
    sim = Simulator(bundle, model)
    with open(baseline_path, encoding="utf-8") as fh:
        baseline = json.load(fh)
    query = SimQuery(
        mode="forward" if mode == "forward" else "goal_seek",
        baseline=baseline,
        source=source,
        target=target,
        horizon=horizon,
        forward_value=value,
        desired_target=desired,
    )
    answer = sim.forward_query(query) if mode == "forward" else sim.goal_seek(query)
    click.echo(json.dumps(answer.to_dict(), indent=2, sort_keys=True))


@cli.command()
@click.option("--artifacts", required=True, help="artifact directory or 'demo'")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8712, show_default=True)
@click.option("--cors-origin", multiple=True, default=("*",))
def serve(artifacts, host, port, cors_origin):
    """Serve the simulator endpoints over HTTP."""
    from .service import serve as run_service

    run_service(_artifact_dir(artifacts), host=host, port=port, cors_origins=cors_origin)


@cli.command()
@click.option("--bootstrap", "bootstrap_json", required=True, type=click.Path(exists=True))
@click.option("--draws", "draws_bin", default=None, type=click.Path(exists=True))
@click.option("--bins", default=40, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(bootstrap_json, draws_bin, bins, out_dir):
    """Render the uncertainty figure and summary table for a bootstrap run."""
    from .report import render_report

    paths = render_report(bootstrap_json, out_dir, draws_bin=draws_bin, bins=bins)
    inputs = {"bootstrap": bootstrap_json}
    if draws_bin:
        inputs["draws"] = draws_bin
    for path in paths:
        write_manifest(path, inputs)
    click.echo("wrote " + ", ".join(paths))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except _VALIDATION_ERRORS as exc:
        message = getattr(exc, "message", None) or str(exc)
        click.echo(f"error: {message}", err=True)
        return 1
    except click.Abort:
        return 1
    except (WlingamError, Exception) as exc:  # noqa: BLE001 - runtime failures exit 2
        click.echo(f"runtime error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
