"""Command-line entry point for the pipeline stages."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .errors import MissingPrerequisite, SoftcreditError
from .pipeline import Pipeline, load_config

STAGES = ("ingest", "enrich", "match", "filter", "teams", "stats", "report", "all")


def _build_pipeline(config_path, stage_dir, backend, seed, confidence_floor,
                    commit_window_days, output_dir):
    config = load_config(config_path)
    if backend:
        config.backend = backend
    if seed is not None:
        config.seed = seed
    if confidence_floor is not None:
        config.filters.confidence_floor = confidence_floor
    if commit_window_days is not None:
        config.filters.commit_window_days = commit_window_days
    if output_dir:
        config.output_dir = str(Path(output_dir).resolve())
    return Pipeline(config, stage_dir)


@click.group()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Pipeline configuration (YAML).")
@click.option("--stage-dir", default="stage", show_default=True,
              type=click.Path(file_okay=False),
              help="Working directory for the store, cache, and stage state.")
@click.option("--backend", type=click.Choice(["live", "fixture"]), default=None,
              help="Override the configured backend mode.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--confidence-floor", type=float, default=None,
              help="Override the analysis confidence floor.")
@click.option("--commit-window-days", type=int, default=None,
              help="Override the commit-window rule length.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None,
              help="Override the report output directory.")
@click.option("-v", "--verbose", is_flag=True, help="Verbose logging.")
@click.pass_context
def main(ctx, config_path, stage_dir, backend, seed, confidence_floor,
         commit_window_days, output_dir, verbose):
    """Link articles to repositories, match authors to developer
    accounts, and reproduce the credit analyses."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = _build_pipeline(
        config_path, stage_dir, backend, seed, confidence_floor,
        commit_window_days, output_dir,
    )


def _stage_command(stage: str):
    @main.command(name=stage, help=f"Run the {stage} stage.")
    @click.pass_obj
    def _cmd(pipeline: Pipeline):
        try:
            result = pipeline.run_stage(stage)
        except MissingPrerequisite as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except SoftcreditError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        finally:
            pipeline.close()
        click.echo(f"{stage}: {result}")

    return _cmd


for _stage in STAGES:
    _stage_command(_stage)


@main.command(help="Serve the annotation API (and web UI when built).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True, type=int)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None,
              help="Directory of built web UI assets to serve at /.")
@click.pass_obj
def annotate(pipeline: Pipeline, host, port, static_dir):
    pipeline.serve_annotations(host=host, port=port, static_dir=static_dir)


if __name__ == "__main__":
    main()
