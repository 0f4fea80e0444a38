"""Congestion game and profile types."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.models.graph import Dag, Path
from src.models.polytope import PathPolytope


@dataclass(frozen=True)
class CongestionGame:
    """Network congestion game with tabulated edge costs.

    ``cost_tables[e, l]`` is the cost of edge ``e`` under load ``l`` for
    ``l = 0..n``. Build with ``game_service.make_game`` which validates the
    tables and caches one path polytope per agent.
    """

    graph: Dag
    agents: Tuple[Tuple[int, int], ...]
    cost_tables: np.ndarray = field(repr=False)
    polytopes: Tuple[PathPolytope, ...] = field(compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return self.graph.edge_count

    @property
    def c_max(self) -> float:
        """Largest cost any edge can charge: ``max_e c_e(n)``."""
        return float(self.cost_tables[:, self.n].max())

    @property
    def cumulative_costs(self) -> np.ndarray:
        """``Σ_{i<=l} c_e(i)`` per edge and load, the Rosenthal potential terms."""
        return np.cumsum(self.cost_tables, axis=1)


@dataclass(frozen=True)
class JointProfile:
    """Either a pure profile (one path per agent) or per-agent edge marginals."""

    paths: Optional[Tuple[Path, ...]] = None
    marginals: Optional[np.ndarray] = field(default=None, compare=False)

    def to_marginals(self, m: int) -> np.ndarray:
        if self.marginals is not None:
            return np.asarray(self.marginals, dtype=float)
        return np.stack([p.indicator(m) for p in self.paths])

    def to_lists(self) -> List[list]:
        return [p.to_list() for p in self.paths] if self.paths is not None else []


@dataclass(frozen=True)
class LoadDistribution:
    """Per-edge probability of each load ``0..n``; rows sum to one."""

    probs: np.ndarray

    def expected_load(self) -> np.ndarray:
        return self.probs @ np.arange(self.probs.shape[1])
