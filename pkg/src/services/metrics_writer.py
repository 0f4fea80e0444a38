"""CSV and JSON emission of recorded rounds."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import DegenerateSeries
from src.models.records import RoundRecord
from src.services.dynamics_service import fit_rate

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "t",
    "agent_id",
    "realized_cost",
    "cum_cost",
    "avg_regret",
    "exploit_abs",
    "exploit_rel",
    "exploit_abs_avg",
    "exploit_rel_avg",
    "potential",
    "stat_gap",
]

FLOAT_FORMAT = "%.12g"


def records_to_frame(records: Sequence[RoundRecord]) -> pd.DataFrame:
    """One row per recorded round and agent; game-level columns repeat per agent."""
    rows = []
    for record in records:
        avg_regret = record.avg_regret
        for agent_id in range(len(record.cum_cost)):
            rows.append({
                "t": record.t,
                "agent_id": agent_id,
                "realized_cost": float(record.realized_cost[agent_id]),
                "cum_cost": float(record.cum_cost[agent_id]),
                "avg_regret": float(avg_regret[agent_id]),
                "exploit_abs": record.exploit_abs,
                "exploit_rel": record.exploit_rel,
                "exploit_abs_avg": record.exploit_abs_avg,
                "exploit_rel_avg": record.exploit_rel_avg,
                "potential": record.potential,
                "stat_gap": record.stat_gap,
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_csv(frame: pd.DataFrame, filepath: Path) -> Path:
    """Write metrics with the fixed header; NaN cells are left empty."""
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {filepath}")
    return filepath


def seed_csv_path(out_dir: Path, name: str, seed: int) -> Path:
    return Path(out_dir) / f"{name}_seed{seed}.csv"


def aggregate_frames(frames: Sequence[pd.DataFrame]) -> pd.DataFrame:
    """Mean curve across seeds per ``(t, agent_id)`` plus an ``n_seeds`` column.

    Rounds missing from some seeds are averaged over the seeds that have
    them.
    """
    if not frames:
        raise ValueError("Nothing to aggregate")
    stacked = pd.concat(frames, ignore_index=True)
    grouped = stacked.groupby(["t", "agent_id"], sort=True)
    mean = grouped.mean(numeric_only=True).reset_index()
    mean["n_seeds"] = grouped.size().to_numpy()
    return mean[CSV_COLUMNS + ["n_seeds"]]


def _rate(frame: pd.DataFrame, column: str, agent_id: Optional[int] = None) -> Optional[float]:
    data = frame if agent_id is None else frame[frame["agent_id"] == agent_id]
    if agent_id is None:
        data = data.groupby("t", sort=True)[column].max().reset_index()
    series = data[["t", column]].dropna().to_numpy(dtype=float)
    try:
        return fit_rate(series)
    except DegenerateSeries as e:
        logger.debug(f"No rate for {column}: {e}")
        return None


def _finite(value: Any) -> Optional[float]:
    value = float(value)
    return value if np.isfinite(value) else None


def summarize_run(frame: pd.DataFrame, seed: int, game: bool = True) -> Dict[str, Any]:
    """Final values and fitted log-log slopes of one seed's metrics."""
    final_t = int(frame["t"].max())
    final = frame[frame["t"] == final_t]
    summary: Dict[str, Any] = {
        "seed": seed,
        "T": final_t,
        "final_avg_regret": _finite(final["avg_regret"].max()),
        "slope_avg_regret": _rate(frame, "avg_regret"),
    }
    if game:
        row = final.iloc[0]
        summary.update({
            "final_exploit_abs": _finite(row["exploit_abs"]),
            "final_exploit_rel": _finite(row["exploit_rel"]),
            "final_exploit_abs_avg": _finite(row["exploit_abs_avg"]),
            "final_exploit_rel_avg": _finite(row["exploit_rel_avg"]),
            "final_potential": _finite(row["potential"]),
            "final_stat_gap": _finite(row["stat_gap"]),
            "slope_exploit_abs_avg": _rate(frame[frame["agent_id"] == 0], "exploit_abs_avg"),
        })
    return summary


def summarize_seeds(summaries: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Across-seed means of every numeric summary field."""
    keys = [
        k for k, v in (summaries[0].items() if summaries else [])
        if k not in ("seed", "T") and (v is None or isinstance(v, (int, float)))
    ]
    means: Dict[str, Any] = {}
    for key in keys:
        values = [s[key] for s in summaries if isinstance(s.get(key), (int, float))]
        means[key] = float(np.mean(values)) if values else None
    return means
