"""Semi-bandit gradient descent with Carathéodory exploration, one agent.

Each round the agent decomposes its fractional point into a path mixture,
samples a path, observes the costs of that path's edges only, builds the
importance-weighted estimate ``ĉ_e = c_e·1[e ∈ p]/x_e`` and takes a projected
gradient step onto the bounded-away polytope of the next round.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

import numpy as np

from src.errors import FeedbackMismatch
from src.models.graph import Path
from src.models.polytope import BoundedAwayView, FractionalStrategy, PathMix, PathPolytope
from src.services.decomposition_service import caratheodory_decompose, sample_path
from src.services.graph_service import random_path_through
from src.services.projection_service import bounded_view, feasible_bounded_point, project

logger = logging.getLogger(__name__)

SCHEDULE_PRESETS = ("default", "regret_optimal", "nash_tuned")
INIT_MODES = ("feasible_construction", "uniform_mix")


@dataclass(frozen=True)
class Schedule:
    """Step size ``γ_t = C_γ·t^{-a}`` and exploration ``μ_t = min(1/m_i, C_μ·t^{-b})``."""

    preset: str
    c_gamma: float
    gamma_exponent: float
    c_mu: float
    mu_exponent: float
    m_i: int

    def gamma(self, t: int) -> float:
        return self.c_gamma * t ** (-self.gamma_exponent)

    def mu(self, t: int) -> float:
        return min(1.0 / self.m_i, self.c_mu * t ** (-self.mu_exponent))


def make_schedule(
    preset: str,
    n: int,
    m: int,
    m_i: int,
    c_max: float,
    c_gamma: Optional[float] = None,
    c_mu: Optional[float] = None,
) -> Schedule:
    """Instantiate a preset for a game with ``n`` agents and ``m`` edges.

    ``m_i`` is the agent's number of active edges. ``c_gamma`` / ``c_mu``
    replace the preset's constant factors.

    Raises:
        ValueError: For unknown presets, or presets scaled by ``1/c_max``
            when ``c_max`` is not positive
    """
    if preset not in SCHEDULE_PRESETS:
        raise ValueError(f"Unknown schedule preset '{preset}', expected one of {SCHEDULE_PRESETS}")
    if m_i < 1:
        raise ValueError("An agent needs at least one active edge")

    if preset == "default":
        gamma_const, gamma_exp, mu_const, mu_exp = 1.0, 3 / 5, 1.0, 1 / 5
    else:
        if c_max <= 0 and c_gamma is None:
            raise ValueError(f"Preset '{preset}' needs c_max > 0 (or an explicit c_gamma)")
        inv_c = 1.0 / c_max if c_max > 0 else 0.0
        if preset == "regret_optimal":
            gamma_const, gamma_exp = inv_c / math.sqrt(m), 3 / 4
            mu_const, mu_exp = 1.0 / math.sqrt(m), 1 / 4
        else:
            gamma_const, gamma_exp = m ** (-4 / 5) * n ** (-8 / 5) * inv_c, 3 / 5
            mu_const, mu_exp = n ** (-6 / 5) * m ** (-11 / 10), 1 / 5

    if c_gamma is not None:
        gamma_const = float(c_gamma)
    if c_mu is not None:
        mu_const = float(c_mu)
    if gamma_const < 0 or mu_const <= 0:
        raise ValueError("Schedule constants must be positive")
    return Schedule(preset, gamma_const, gamma_exp, mu_const, mu_exp, m_i)


@dataclass
class LearnerState:
    """One agent's SBGD-CE state at the start of round ``t``."""

    agent_id: int
    polytope: PathPolytope
    x: FractionalStrategy
    t: int
    schedule: Schedule
    view: BoundedAwayView
    last_mix: Optional[PathMix] = None
    last_path: Optional[Path] = None

    @property
    def mu(self) -> float:
        return self.view.mu


def init_learner(
    polytope: PathPolytope,
    schedule: Schedule,
    init_mode: str = "feasible_construction",
    rng: Optional[np.random.Generator] = None,
    agent_id: int = 0,
) -> LearnerState:
    """Round-one state with ``x¹`` in the polytope bounded away by ``1/|E_i|``.

    ``feasible_construction`` averages one covering path per active edge;
    ``uniform_mix`` averages one random covering path per active edge (drawn
    from ``rng``) and projects the result.
    """
    floor = bounded_view(polytope, polytope.max_mu)
    if init_mode == "feasible_construction":
        x = feasible_bounded_point(floor)
    elif init_mode == "uniform_mix":
        if rng is None:
            raise ValueError("uniform_mix initialization needs a random generator")
        g = polytope.graph
        x = np.zeros(polytope.m)
        for e in polytope.active_idx:
            path = random_path_through(g, polytope.active, int(e), rng, polytope.source, polytope.sink)
            x[list(path.edge_ids)] += 1.0
        x = project(floor, x / polytope.active_count)
    else:
        raise ValueError(f"Unknown init mode '{init_mode}', expected one of {INIT_MODES}")

    view = bounded_view(polytope, schedule.mu(1))
    return LearnerState(agent_id=agent_id, polytope=polytope, x=x, t=1, schedule=schedule, view=view)


def choose(state: LearnerState, rng: np.random.Generator) -> Path:
    """Decompose ``x^t``, remember the mixture and sample this round's path."""
    mix = caratheodory_decompose(state.polytope, state.x)
    path = sample_path(mix, rng)
    state.last_mix = mix
    state.last_path = path
    return path


def estimate_costs(state: LearnerState, observed: Iterable[Tuple[int, float]]) -> np.ndarray:
    """Importance-weighted cost estimate from semi-bandit feedback.

    Raises:
        FeedbackMismatch: If the observed edges are not exactly the edges of
            the last sampled path
    """
    if state.last_path is None:
        raise FeedbackMismatch("No path has been chosen this round")
    observed = list(observed)
    edges = [int(e) for e, _ in observed]
    if len(edges) != len(set(edges)) or set(edges) != set(state.last_path.edge_ids):
        raise FeedbackMismatch(f"Observed edges {sorted(edges)} differ from path {state.last_path.to_list()}")

    c_hat = np.zeros(state.polytope.m)
    for e, cost in observed:
        c_hat[int(e)] = float(cost) / state.x[int(e)]
    return c_hat


def update(state: LearnerState, c_hat: np.ndarray) -> LearnerState:
    """Projected step ``x^{t+1} = Π_{X^{μ_{t+1}}}[x^t − γ_t ĉ^t]``."""
    c_hat = np.asarray(c_hat, dtype=float)
    if not np.all(np.isfinite(c_hat)):
        raise ValueError("Cost estimate must be finite")
    t = state.t
    mu_next = state.schedule.mu(t + 1)
    view = state.view if mu_next == state.view.mu else bounded_view(state.polytope, mu_next)
    x_next = project(view, state.x - state.schedule.gamma(t) * c_hat)
    return replace(state, x=x_next, t=t + 1, view=view, last_mix=None, last_path=None)
