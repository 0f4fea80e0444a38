"""Shared helpers for CLI commands."""

import json
import logging
from pathlib import Path
from typing import Any, NoReturn, Optional

import click
import numpy as np
from rich.console import Console

from src.errors import ConfigError
from src.services.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

# stdout carries JSON only; everything for humans goes here.
console = Console(stderr=True)

config_option = click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment configuration (.json, .yaml or .yml)",
)


def fail(error: Exception) -> NoReturn:
    """Report ``error`` on stderr and exit 1 for config errors, 2 otherwise."""
    code = EXIT_CONFIG if isinstance(error, ConfigError) else EXIT_RUNTIME
    if code == EXIT_RUNTIME:
        logger.debug("Command failed", exc_info=error)
    click.echo(f"❌ Error: {error}", err=True)
    click.get_current_context().exit(code)


def load_config(config_path: Path, **overrides: Any) -> ExperimentConfig:
    config = ExperimentConfig.from_file(config_path)
    if any(value is not None for value in overrides.values()):
        config = config.with_overrides(**overrides)
    return config


def parse_vector(text: str, name: str) -> np.ndarray:
    """Parse a JSON array of numbers given on the command line."""
    try:
        values = json.loads(text)
    except json.JSONDecodeError as e:
        raise click.BadParameter(f"not valid JSON: {e.msg}", param_hint=name) from e
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
        raise click.BadParameter("expected a JSON array of numbers", param_hint=name)
    return np.asarray(values, dtype=float)


def emit_json(payload: Any, indent: Optional[int] = None) -> None:
    click.echo(json.dumps(payload, sort_keys=True, indent=indent))
