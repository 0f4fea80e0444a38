"""CLI commands for inspecting path polytopes of a configured game."""

import click

from src.commands.common import config_option, emit_json, fail, load_config, parse_vector
from src.errors import CongestionError
from src.services.decomposition_service import caratheodory_decompose
from src.services.projection_service import PROJECTION_METHODS, bounded_view, epsilon_greedy_path, is_member, project

agent_option = click.option("--agent", type=click.IntRange(min=0), default=0, show_default=True,
                            help="Agent whose path polytope is used")


def _agent_polytope(config_path, agent: int):
    game = load_config(config_path).build_game()
    if agent >= game.n:
        raise click.BadParameter(f"config has {game.n} agent(s)", param_hint="--agent")
    return game.polytopes[agent]


@click.command("decompose")
@config_option
@agent_option
@click.option("--x", "x_text", required=True, help="Edge marginals as a JSON array, one entry per edge")
def decompose_cmd(config_path, agent, x_text):
    """Decompose a fractional strategy into a mixture of paths."""
    x = parse_vector(x_text, "--x")
    try:
        polytope = _agent_polytope(config_path, agent)
        mix = caratheodory_decompose(polytope, x)
    except CongestionError as e:
        fail(e)
    emit_json(mix.to_dict())


@click.command("project")
@config_option
@agent_option
@click.option("--y", "y_text", required=True, help="Point to project as a JSON array, one entry per edge")
@click.option("--mu", type=click.FloatRange(min=0.0), default=0.0, show_default=True,
              help="Lower bound on every active edge")
@click.option("--method", type=click.Choice(PROJECTION_METHODS), default="auto", show_default=True)
@click.option("--eps-greedy", type=click.FloatRange(min=0.0, max=1.0),
              help="Mix the result with the uniform covering point instead of raising mu")
def project_cmd(config_path, agent, y_text, mu, method, eps_greedy):
    """Euclidean projection onto the agent's polytope bounded away by MU."""
    y = parse_vector(y_text, "--y")
    try:
        polytope = _agent_polytope(config_path, agent)
        view = bounded_view(polytope, mu)
        x = project(view, y, method=method)
        if eps_greedy is not None:
            x = epsilon_greedy_path(polytope, x, eps_greedy)
    except (CongestionError, ValueError) as e:
        fail(e)
    member = is_member(view if eps_greedy is None else polytope, x)
    emit_json({"x": [float(v) for v in x], "member": bool(member), "mu": mu})
