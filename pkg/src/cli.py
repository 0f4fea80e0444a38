"""CLI for semi-bandit congestion-game experiments."""

import logging
import sys
from typing import Optional, Sequence

import click
from rich.logging import RichHandler

from src import __version__
from src.commands.common import EXIT_OK, console
from src.commands.experiment import gen_chain_cmd, run_adversarial_cmd, run_dynamics_cmd, validate_config_cmd
from src.commands.polytope import decompose_cmd, project_cmd

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def setup_logging(level: str) -> None:
    """Route log records through rich on stderr."""
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=True)],
        force=True,
    )


@click.group()
@click.version_option(version=__version__)
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default="WARNING",
              show_default=True, help="Logging verbosity (logs go to stderr)")
def cli(log_level: str):
    """Semi-bandit gradient descent with Carathéodory exploration for congestion games."""
    setup_logging(log_level.upper())


cli.add_command(run_dynamics_cmd)
cli.add_command(run_adversarial_cmd)
cli.add_command(decompose_cmd)
cli.add_command(project_cmd)
cli.add_command(gen_chain_cmd)
cli.add_command(validate_config_cmd)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code (0 ok, 1 config error, 2 runtime error)."""
    try:
        # Without standalone mode click returns the exit code of ctx.exit() instead of raising
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="sbgd", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
