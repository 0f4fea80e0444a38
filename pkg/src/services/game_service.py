"""Congestion-game semantics: loads, costs, potential, equilibria.

Fractional profiles are ``(n, m)`` arrays of per-agent edge marginals.
Expected quantities assume agents sample their paths independently, which
is how the learning dynamics play.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.errors import DivideByZero, TooLarge
from src.models.game import CongestionGame, JointProfile, LoadDistribution
from src.models.graph import Dag, Path
from src.services.graph_service import count_paths, enumerate_paths, shortest_path
from src.services.projection_service import agent_polytopes, bounded_view, project

logger = logging.getLogger(__name__)

# Denominators below this make relative exploitability undefined.
REL_DENOMINATOR_FLOOR = 1e-12

PURE_NE_CAP = 10**6


def make_game(graph: Dag, agents: Sequence[Sequence[int]], cost_tables) -> CongestionGame:
    """Validate cost tables and build a game.

    Args:
        graph: Resource network
        agents: ``(source, sink)`` per agent
        cost_tables: ``(m, n+1)`` array, row ``e`` is ``c_e(0..n)``

    Raises:
        ValueError: If tables have the wrong shape, are negative or decrease
            with load
    """
    agents = tuple((int(s), int(t)) for s, t in agents)
    n = len(agents)
    if n == 0:
        raise ValueError("A game needs at least one agent")
    tables = np.array(cost_tables, dtype=float)
    if tables.shape != (graph.edge_count, n + 1):
        raise ValueError(f"Cost tables must have shape {(graph.edge_count, n + 1)}, got {tables.shape}")
    if not np.all(np.isfinite(tables)) or np.any(tables < 0):
        raise ValueError("Edge costs must be finite and nonnegative")
    if np.any(np.diff(tables, axis=1) < 0):
        bad = int(np.argmax(np.any(np.diff(tables, axis=1) < 0, axis=1)))
        raise ValueError(f"Cost table of edge {bad} decreases with load")
    tables.setflags(write=False)
    return CongestionGame(
        graph=graph,
        agents=agents,
        cost_tables=tables,
        polytopes=tuple(agent_polytopes(graph, list(agents))),
    )


def affine_tables(a, b, m: int, n: int) -> np.ndarray:
    """Expand ``c(l) = a·l + b`` into tables with ``c(0) = 0``.

    ``a`` and ``b`` may be scalars or per-edge sequences; both must be
    nonnegative so the tables are nondecreasing.
    """
    a = np.broadcast_to(np.asarray(a, dtype=float), (m,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (m,))
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("Affine cost coefficients must be nonnegative")
    loads = np.arange(n + 1, dtype=float)
    tables = a[:, None] * loads[None, :] + b[:, None]
    tables[:, 0] = 0.0
    return tables


def pure_loads(g: CongestionGame, paths: Sequence[Path]) -> np.ndarray:
    """Number of agents using each edge."""
    loads = np.zeros(g.m, dtype=int)
    for path in paths:
        loads[list(path.edge_ids)] += 1
    return loads


def edge_costs_at(g: CongestionGame, loads: np.ndarray) -> np.ndarray:
    """``c_e(l_e)`` for an integer load vector."""
    return g.cost_tables[np.arange(g.m), loads]


def agent_cost(g: CongestionGame, paths: Sequence[Path]) -> np.ndarray:
    """Realized cost ``C_i(p)`` of every agent under a pure profile."""
    costs = edge_costs_at(g, pure_loads(g, paths))
    return np.array([costs[list(path.edge_ids)].sum() for path in paths])


def load_distribution(g: CongestionGame, marginals: np.ndarray,
                      exclude_agent: Optional[int] = None) -> LoadDistribution:
    """Poisson-binomial load distribution of every edge.

    Convolves one Bernoulli(x_ie) per included agent, O(n²m) overall.
    """
    x = np.asarray(marginals, dtype=float)
    probs = np.zeros((g.m, g.n + 1))
    probs[:, 0] = 1.0
    for j in range(g.n):
        if j == exclude_agent:
            continue
        xj = x[j][:, None]
        shifted = np.zeros_like(probs)
        shifted[:, 1:] = probs[:, :-1]
        probs = probs * (1.0 - xj) + shifted * xj
    return LoadDistribution(probs=probs)


def potential(g: CongestionGame, marginals: np.ndarray) -> float:
    """Fractional potential ``Φ(x) = Σ_e E[Σ_{i<=L_e} c_e(i)]``."""
    dist = load_distribution(g, marginals)
    return float(np.sum(dist.probs * g.cumulative_costs))


def expected_edge_costs(g: CongestionGame, marginals: np.ndarray, agent: int) -> np.ndarray:
    """``E[c_e(1 + L_{-i,e})]``: cost agent ``i`` would pay on each edge."""
    dist = load_distribution(g, marginals, exclude_agent=agent).probs
    return np.sum(dist[:, : g.n] * g.cost_tables[:, 1:], axis=1)


def grad_potential(g: CongestionGame, marginals: np.ndarray) -> np.ndarray:
    """``∂Φ/∂x_ie = E[c_e(L_{-i,e} + 1)]``, zero on edges inactive for agent ``i``."""
    grad = np.zeros((g.n, g.m))
    for i, polytope in enumerate(g.polytopes):
        w = expected_edge_costs(g, marginals, i)
        grad[i, polytope.active_idx] = w[polytope.active_idx]
    return grad


def expected_agent_cost(g: CongestionGame, marginals: np.ndarray, agent: int) -> float:
    """Expected cost of ``agent`` when all agents sample independently."""
    x = np.asarray(marginals, dtype=float)
    return float(x[agent] @ expected_edge_costs(g, x, agent))


def best_response_value(g: CongestionGame, marginals: np.ndarray, agent: int) -> tuple:
    """Best pure path for ``agent`` against the others and its expected cost."""
    s, t = g.agents[agent]
    return shortest_path(g.graph, s, t, expected_edge_costs(g, marginals, agent))


@dataclass(frozen=True)
class ExploitabilityReport:
    """Largest unilateral improvement, absolute and relative to the best response."""

    absolute: float
    relative: float
    gaps: np.ndarray
    best_responses: np.ndarray
    expected_costs: np.ndarray


def exploitability(g: CongestionGame, marginals: np.ndarray, strict: bool = False) -> ExploitabilityReport:
    """Exploitability of a product profile.

    The relative form divides each agent's gap by that agent's best-response value.
    When a best-response value falls below ``REL_DENOMINATOR_FLOOR`` the
    relative form is NaN, or ``DivideByZero`` is raised if ``strict``.
    """
    x = np.asarray(marginals, dtype=float)
    costs = np.zeros(g.n)
    best = np.zeros(g.n)
    for i in range(g.n):
        w = expected_edge_costs(g, x, i)
        costs[i] = float(x[i] @ w)
        s, t = g.agents[i]
        best[i] = shortest_path(g.graph, s, t, w)[1]
    gaps = np.maximum(costs - best, 0.0)

    if np.any(best < REL_DENOMINATOR_FLOOR):
        if strict:
            raise DivideByZero("Best-response value is zero; relative exploitability undefined")
        relative = float("nan")
    else:
        relative = float(np.max(gaps / best))
    return ExploitabilityReport(
        absolute=float(gaps.max()),
        relative=relative,
        gaps=gaps,
        best_responses=best,
        expected_costs=costs,
    )


def smoothness_constant(g: CongestionGame) -> float:
    """Step ``λ = (2 n² c_max √m)⁻¹``; zero for cost-free games."""
    c_max = g.c_max
    if c_max <= 0:
        return 0.0
    return 1.0 / (2.0 * g.n**2 * c_max * math.sqrt(g.m))


def stationarity_gap(g: CongestionGame, marginals: np.ndarray, mu: float, method: str = "auto") -> float:
    """Projected-gradient residual ``‖x − Π_{X^μ}[x − λ∇Φ(x)]‖₂``.

    The projection separates across agents, so each agent's block is
    projected onto the bounded-away polytope of that agent.
    """
    x = np.asarray(marginals, dtype=float)
    step = smoothness_constant(g)
    grad = grad_potential(g, x)
    total = 0.0
    for i, polytope in enumerate(g.polytopes):
        view = bounded_view(polytope, mu)
        moved = project(view, x[i] - step * grad[i], method=method)
        total += float(np.sum((x[i] - moved) ** 2))
    return math.sqrt(total)


def brute_force_pure_ne(g: CongestionGame, eps: float = 0.0, cap: int = PURE_NE_CAP) -> List[JointProfile]:
    """All pure profiles where no agent gains more than ``eps`` by deviating.

    Raises:
        TooLarge: If the number of pure profiles exceeds ``cap``
    """
    sizes = [count_paths(g.graph, s, t) for s, t in g.agents]
    total = math.prod(sizes)
    if total > cap:
        raise TooLarge(f"{total} pure profiles exceed cap {cap}")

    strategy_sets = [enumerate_paths(g.graph, s, t, cap) for s, t in g.agents]
    edge_idx = np.arange(g.m)
    equilibria: List[JointProfile] = []
    for profile in itertools.product(*strategy_sets):
        loads = pure_loads(g, profile)
        costs = g.cost_tables[edge_idx, loads]
        stable = True
        for i, path in enumerate(profile):
            edges = list(path.edge_ids)
            own = costs[edges].sum()
            others = loads.copy()
            others[edges] -= 1
            s, t = g.agents[i]
            deviation = shortest_path(g.graph, s, t, g.cost_tables[edge_idx, others + 1])[1]
            if own - deviation > eps + 1e-12:
                stable = False
                break
        if stable:
            equilibria.append(JointProfile(paths=tuple(profile)))
    logger.debug(f"Checked {total} pure profiles, {len(equilibria)} are {eps}-equilibria")
    return equilibria
