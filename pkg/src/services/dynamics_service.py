"""Learning dynamics: all agents learning together, or one agent against an adversary.

Randomness comes from one ``SeedSequence`` per run, split into independent
streams (one per agent plus one auxiliary), so evaluating metrics never
perturbs trajectories.
"""

import logging
import time
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import DegenerateSeries
from src.models.game import CongestionGame
from src.models.graph import Dag, Path
from src.models.polytope import PathPolytope
from src.models.records import ADVERSARY_KINDS, AdversarySpec, DynamicsResult, RoundRecord
from src.services.game_service import edge_costs_at, exploitability, potential, pure_loads, stationarity_gap
from src.services.graph_service import shortest_path
from src.services.learner import Schedule, choose, estimate_costs, init_learner, make_schedule, update

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int], None]


def default_stride(T: int) -> int:
    return max(1, T // 500)


def spawn_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _is_recorded(t: int, T: int, stride: int) -> bool:
    return t == 1 or t == T or t % stride == 0


def game_schedules(game: CongestionGame, preset: str = "default", c_gamma: Optional[float] = None,
                   c_mu: Optional[float] = None) -> List[Schedule]:
    """One schedule per agent for ``preset``."""
    return [
        make_schedule(preset, game.n, game.m, polytope.active_count, game.c_max, c_gamma, c_mu)
        for polytope in game.polytopes
    ]


def run_dynamics(
    game: CongestionGame,
    schedules: Union[str, Sequence[Schedule]],
    T: int,
    seed: int,
    metric_stride: Optional[int] = None,
    init_mode: str = "feasible_construction",
    progress: Optional[ProgressCallback] = None,
) -> DynamicsResult:
    """Play ``T`` rounds of semi-bandit game dynamics with every agent learning.

    Per round all agents choose first, then realized loads fix the edge
    costs, and each agent sees only the costs of its own path before
    updating. Every ``metric_stride`` rounds exploitability, potential and
    the stationarity gap are evaluated at the current marginals and at the
    running average of the marginals.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    stride = metric_stride or default_stride(T)
    if stride < 1:
        raise ValueError("metric_stride must be at least 1")
    if isinstance(schedules, str):
        schedules = game_schedules(game, schedules)
    if len(schedules) != game.n:
        raise ValueError(f"Expected {game.n} schedules, got {len(schedules)}")

    n, m = game.n, game.m
    streams = spawn_streams(seed, n + 1)
    states = [
        init_learner(polytope, schedules[i], init_mode, rng=streams[i], agent_id=i)
        for i, polytope in enumerate(game.polytopes)
    ]
    edge_idx = np.arange(m)
    tables = game.cost_tables

    cum_cost = np.zeros(n)
    cum_edge = np.zeros((n, m))
    x_sum = np.zeros((n, m))
    records: List[RoundRecord] = []
    started = time.perf_counter()
    logger.info(f"Running dynamics: n={n}, m={m}, T={T}, seed={seed}, stride={stride}")

    for t in range(1, T + 1):
        xs = np.stack([state.x for state in states])
        x_sum += xs

        paths = [choose(state, streams[i]) for i, state in enumerate(states)]
        loads = pure_loads(game, paths)
        costs = edge_costs_at(game, loads)

        realized = np.zeros(n)
        for i, path in enumerate(paths):
            edges = list(path.edge_ids)
            realized[i] = costs[edges].sum()
            others = loads.copy()
            others[edges] -= 1
            counterfactual = tables[edge_idx, others + 1]
            cum_edge[i] += counterfactual
            c_hat = estimate_costs(states[i], [(e, costs[e]) for e in edges])
            states[i] = update(states[i], c_hat)
        cum_cost += realized

        if _is_recorded(t, T, stride):
            records.append(_game_record(game, t, xs, x_sum / t, realized, cum_cost, cum_edge,
                                        min(s.mu(t) for s in schedules), time.perf_counter() - started))
        if progress is not None:
            progress(t)

    final = records[-1]
    logger.info(
        f"Dynamics finished in {final.wall_time:.1f}s: exploitability(avg)={final.exploit_abs_avg:.4g}, "
        f"avg regret={np.max(final.avg_regret):.4g}"
    )
    return DynamicsResult(
        seed=seed,
        records=records,
        final_marginals=np.stack([state.x for state in states]),
        average_marginals=x_sum / T,
        extra={"aux_rng": streams[n]},
    )


def _hindsight(g: Dag, agents, cum_edge: np.ndarray) -> np.ndarray:
    """Cost of each agent's best fixed path against its cumulative edge costs."""
    return np.array([shortest_path(g, s, t, cum_edge[i])[1] for i, (s, t) in enumerate(agents)])


def _game_record(game, t, xs, x_avg, realized, cum_cost, cum_edge, mu, wall) -> RoundRecord:
    current = exploitability(game, xs)
    averaged = exploitability(game, x_avg)
    return RoundRecord(
        t=t,
        realized_cost=realized.copy(),
        cum_cost=cum_cost.copy(),
        cum_edge_cost=cum_edge.copy(),
        hindsight_cost=_hindsight(game.graph, game.agents, cum_edge),
        exploit_abs=current.absolute,
        exploit_rel=current.relative,
        exploit_abs_avg=averaged.absolute,
        exploit_rel_avg=averaged.relative,
        potential=potential(game, xs),
        stat_gap=stationarity_gap(game, xs, mu),
        wall_time=wall,
    )


class CostAdversary:
    """Emits one cost vector per round, checked against ``[0, c_max]``."""

    def __init__(self, spec: AdversarySpec, m: int):
        self.spec = spec
        self.m = m

    def __call__(self, t: int, last_path: Optional[Path]) -> np.ndarray:
        costs = np.asarray(self.costs(t, last_path), dtype=float)
        if costs.shape != (self.m,):
            raise ValueError(f"Adversary produced {costs.shape} costs for {self.m} edges")
        if np.any(costs < 0) or np.any(costs > self.spec.c_max + 1e-12):
            raise ValueError(f"Adversary costs at round {t} leave [0, {self.spec.c_max}]")
        return costs

    def costs(self, t: int, last_path: Optional[Path]) -> np.ndarray:
        raise NotImplementedError


class FixedSequenceAdversary(CostAdversary):
    def __init__(self, spec: AdversarySpec, m: int, T: int):
        super().__init__(spec, m)
        self.sequence = np.asarray(spec.data.get("costs", []), dtype=float)
        if len(self.sequence) < T:
            raise ValueError(f"Fixed sequence has {len(self.sequence)} cost vectors, need {T}")

    def costs(self, t, last_path):
        return self.sequence[t - 1]


class IidRandomAdversary(CostAdversary):
    def __init__(self, spec: AdversarySpec, m: int, rng: np.random.Generator):
        super().__init__(spec, m)
        self.low = float(spec.data.get("low", 0.0))
        self.high = float(spec.data.get("high", spec.c_max))
        if not 0.0 <= self.low <= self.high <= spec.c_max:
            raise ValueError(f"iid_random needs 0 <= low <= high <= c_max, got [{self.low}, {self.high}]")
        self.rng = rng

    def costs(self, t, last_path):
        return self.rng.uniform(self.low, self.high, size=self.m)


class LoadReplayAdversary(CostAdversary):
    """Replays recorded loads through cost tables: ``c_e = table_e[l_e]``."""

    def __init__(self, spec: AdversarySpec, m: int, T: int):
        super().__init__(spec, m)
        self.loads = np.asarray(spec.data.get("loads", []), dtype=int)
        self.tables = np.asarray(spec.data.get("tables", []), dtype=float)
        if len(self.loads) < T:
            raise ValueError(f"Load replay has {len(self.loads)} load vectors, need {T}")
        if self.tables.ndim != 2 or self.tables.shape[0] != m:
            raise ValueError(f"Load replay needs one cost table per edge ({m})")

    def costs(self, t, last_path):
        return self.tables[np.arange(self.m), self.loads[t - 1]]


class AdaptiveAdversary(CostAdversary):
    """Charges ``c_max`` on the edges the agent used last round."""

    def costs(self, t, last_path):
        c = np.zeros(self.m)
        if last_path is not None:
            c[list(last_path.edge_ids)] = self.spec.c_max
        return c


def make_adversary(spec: AdversarySpec, m: int, T: int, rng: np.random.Generator) -> CostAdversary:
    if spec.kind == "fixed_sequence":
        return FixedSequenceAdversary(spec, m, T)
    if spec.kind == "iid_random":
        return IidRandomAdversary(spec, m, rng)
    if spec.kind == "load_replay":
        return LoadReplayAdversary(spec, m, T)
    if spec.kind == "adaptive":
        return AdaptiveAdversary(spec, m)
    raise ValueError(f"Unknown adversary kind '{spec.kind}', expected one of {ADVERSARY_KINDS}")


def run_adversarial(
    polytope: PathPolytope,
    schedule: Schedule,
    adversary: AdversarySpec,
    T: int,
    seed: int,
    metric_stride: Optional[int] = None,
    init_mode: str = "feasible_construction",
    progress: Optional[ProgressCallback] = None,
) -> Tuple[List[RoundRecord], float]:
    """Online resource selection for one agent.

    Returns the recorded rounds and the realized regret against the best
    fixed path in hindsight, found exactly by a shortest path on cumulative
    edge costs.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    stride = metric_stride or default_stride(T)
    agent_rng, adversary_rng = spawn_streams(seed, 2)
    state = init_learner(polytope, schedule, init_mode, rng=agent_rng)
    emit = make_adversary(adversary, polytope.m, T, adversary_rng)
    endpoints = [(polytope.source, polytope.sink)]

    cum_cost = np.zeros(1)
    cum_edge = np.zeros((1, polytope.m))
    last_path: Optional[Path] = None
    records: List[RoundRecord] = []
    started = time.perf_counter()
    logger.info(f"Running adversarial ({adversary.kind}): m={polytope.m}, T={T}, seed={seed}")

    for t in range(1, T + 1):
        path = choose(state, agent_rng)
        costs = emit(t, last_path)
        edges = list(path.edge_ids)
        realized = np.array([costs[edges].sum()])
        cum_cost += realized
        cum_edge[0] += costs
        state = update(state, estimate_costs(state, [(e, costs[e]) for e in edges]))
        last_path = path

        if _is_recorded(t, T, stride):
            records.append(RoundRecord(
                t=t,
                realized_cost=realized,
                cum_cost=cum_cost.copy(),
                cum_edge_cost=cum_edge.copy(),
                hindsight_cost=_hindsight(polytope.graph, endpoints, cum_edge),
                wall_time=time.perf_counter() - started,
            ))
        if progress is not None:
            progress(t)

    regret = float(records[-1].regret[0])
    logger.info(f"Adversarial run finished: regret={regret:.4g}, R(T)/T={regret / T:.4g}")
    return records, regret


def fit_rate(series: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of ``log value`` against ``log t`` over the final half.

    Raises:
        DegenerateSeries: If there are fewer than 10 points or a value is not positive
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or len(data) < 10:
        raise DegenerateSeries(f"Need at least 10 points to fit a rate, got {len(data)}")
    tail = data[len(data) // 2:]
    if np.any(~np.isfinite(tail)) or np.any(tail[:, 0] <= 0) or np.any(tail[:, 1] <= 0):
        raise DegenerateSeries("Rate fitting needs positive, finite t and values")
    slope, _ = np.polyfit(np.log(tail[:, 0]), np.log(tail[:, 1]), 1)
    return float(slope)


def best_iterate_summary(records: Sequence[RoundRecord], rng: np.random.Generator) -> dict:
    """Time-averaged exploitability and that of one uniformly drawn recorded iterate."""
    values = np.array([r.exploit_abs for r in records])
    if len(values) == 0:
        return {"mean_exploit_abs": None, "sampled_t": None, "sampled_exploit_abs": None}
    k = int(rng.integers(len(values)))
    return {
        "mean_exploit_abs": float(np.mean(values)),
        "sampled_t": int(records[k].t),
        "sampled_exploit_abs": float(values[k]),
    }
