"""Per-round metrics and adversary descriptions."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

ADVERSARY_KINDS = ("fixed_sequence", "iid_random", "load_replay", "adaptive")


@dataclass(frozen=True)
class AdversarySpec:
    """Cost sequence for online resource selection.

    ``data`` depends on ``kind``:

    * ``fixed_sequence``: ``{"costs": [[c_e, ...], ...]}``, one vector per round
    * ``iid_random``: ``{"low": float, "high": float}``, uniform per edge and round
    * ``load_replay``: ``{"loads": [[l_e, ...], ...], "tables": [[c_e(0..), ...], ...]}``
    * ``adaptive``: no data; charges ``c_max`` on the previously sampled path
    """

    kind: str
    c_max: float = 1.0
    data: Dict[str, Any] = field(default_factory=dict)


@dataclass
class RoundRecord:
    """Metrics captured at round ``t``.

    Per-agent arrays have length ``n``; ``cum_edge_cost[i]`` accumulates the
    cost agent ``i`` would have paid on each edge, which gives the best fixed
    path in hindsight. Game-level metrics are NaN for single-agent runs.
    """

    t: int
    realized_cost: np.ndarray
    cum_cost: np.ndarray
    cum_edge_cost: np.ndarray
    hindsight_cost: np.ndarray
    exploit_abs: float = float("nan")
    exploit_rel: float = float("nan")
    exploit_abs_avg: float = float("nan")
    exploit_rel_avg: float = float("nan")
    potential: float = float("nan")
    stat_gap: float = float("nan")
    wall_time: float = 0.0

    @property
    def regret(self) -> np.ndarray:
        return self.cum_cost - self.hindsight_cost

    @property
    def avg_regret(self) -> np.ndarray:
        return self.regret / self.t


@dataclass
class DynamicsResult:
    """Outcome of one seeded run."""

    seed: int
    records: List[RoundRecord]
    final_marginals: np.ndarray
    average_marginals: np.ndarray
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def final(self) -> Optional[RoundRecord]:
        return self.records[-1] if self.records else None
