"""Experiment configuration: parsing, validation and game construction.

Configurations are JSON (or YAML) documents; see ``docs/configuration.md``
for the schema. Validation errors carry the JSON path of the offending
field and, when the source text is available, its line number.
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from src.errors import ConfigError, CongestionError
from src.models.game import CongestionGame
from src.models.graph import Dag
from src.models.records import ADVERSARY_KINDS, AdversarySpec
from src.services.game_service import affine_tables, make_game
from src.services.graph_service import build_dag
from src.services.learner import INIT_MODES, SCHEDULE_PRESETS

logger = logging.getLogger(__name__)

GENERATORS = ("chain", "parallel")


def gen_chain(k: int, d: int) -> Dict[str, Any]:
    """Line of ``k + 1`` nodes with ``d`` parallel edges between neighbours (``d**k`` paths)."""
    if k < 1 or d < 1:
        raise ValueError(f"Chain needs segments >= 1 and edges_per_segment >= 1, got k={k}, d={d}")
    return {"nodes": k + 1, "edges": [[i, i + 1] for i in range(k) for _ in range(d)]}


def gen_parallel(d: int) -> Dict[str, Any]:
    """Two nodes joined by ``d`` parallel edges."""
    return gen_chain(1, d)


def _line_of(text: Optional[str], key: Optional[str]) -> Optional[int]:
    """1-based line of the first occurrence of ``key`` in the source text."""
    if not text or not key:
        return None
    needles = (f'"{key}"', f"{key}:")
    for number, line in enumerate(text.splitlines(), start=1):
        if any(needle in line for needle in needles):
            return number
    return None


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    name: str = "experiment"
    graph: Dict[str, Any] = field(default_factory=lambda: gen_chain(1, 2))
    agents: Any = None
    costs: Dict[str, Any] = field(default_factory=lambda: {"affine": [1.0, 0.0]})
    schedule: Dict[str, Any] = field(default_factory=lambda: {"preset": "default"})
    init: str = "feasible_construction"
    T: int = 1000
    seeds: List[int] = field(default_factory=lambda: [0])
    metric_stride: Optional[int] = None
    adversary: Optional[Dict[str, Any]] = None
    output: str = "results"
    source_text: Optional[str] = field(default=None, repr=False, compare=False)

    # Construction

    @classmethod
    def from_file(cls, filepath: Path) -> "ExperimentConfig":
        """Load a configuration from ``.json``, ``.yaml`` or ``.yml``.

        Raises:
            ConfigError: On unreadable files, syntax errors or invalid content
        """
        filepath = Path(filepath)
        try:
            text = filepath.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config file: {e}") from e

        if filepath.suffix in (".yaml", ".yml"):
            try:
                data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                raise ConfigError(f"Invalid YAML: {e}", line=mark.line + 1 if mark else None) from e
        elif filepath.suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Invalid JSON: {e.msg}", line=e.lineno) from e
        else:
            raise ConfigError(f"Unsupported file format: {filepath.suffix}. Use .json, .yaml or .yml")

        return cls.from_dict(data, source_text=text)

    @classmethod
    def from_dict(cls, data: Any, source_text: Optional[str] = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a JSON object", line=1 if source_text else None)
        known = {"name", "graph", "agents", "costs", "schedule", "init", "T", "seeds",
                 "metric_stride", "adversary", "output"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown field(s): {', '.join(unknown)}", path=unknown[0],
                              line=_line_of(source_text, unknown[0]))

        defaults = cls()
        config = cls(
            name=data.get("name", defaults.name),
            graph=copy.deepcopy(data.get("graph", defaults.graph)),
            agents=copy.deepcopy(data.get("agents")),
            costs=copy.deepcopy(data.get("costs", defaults.costs)),
            schedule=copy.deepcopy(data.get("schedule", defaults.schedule)),
            init=data.get("init", defaults.init),
            T=data.get("T", defaults.T),
            seeds=copy.deepcopy(data.get("seeds", defaults.seeds)),
            metric_stride=data.get("metric_stride"),
            adversary=copy.deepcopy(data.get("adversary")),
            output=data.get("output", defaults.output),
            source_text=source_text,
        )
        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "graph": copy.deepcopy(self.graph),
            "agents": self.agent_pairs(),
            "costs": copy.deepcopy(self.costs),
            "schedule": copy.deepcopy(self.schedule),
            "init": self.init,
            "T": self.T,
            "seeds": list(self.seeds),
            "metric_stride": self.metric_stride,
            "output": self.output,
        }
        if self.adversary is not None:
            data["adversary"] = copy.deepcopy(self.adversary)
        return data

    def to_file(self, filepath: Path) -> None:
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        with open(filepath, "w", encoding="utf-8") as f:
            if filepath.suffix in (".yaml", ".yml"):
                yaml.safe_dump(self.to_dict(), f, sort_keys=False)
            else:
                json.dump(self.to_dict(), f, indent=2)
                f.write("\n")

    def with_overrides(self, seeds: Optional[int] = None, stride: Optional[int] = None,
                       output: Optional[str] = None) -> "ExperimentConfig":
        """Copy with CLI overrides applied (``seeds`` becomes ``0..seeds-1``)."""
        data = self.to_dict()
        if seeds is not None:
            data["seeds"] = list(range(seeds))
        if stride is not None:
            data["metric_stride"] = stride
        if output is not None:
            data["output"] = str(output)
        return ExperimentConfig.from_dict(data, source_text=self.source_text)

    # Validation

    def _fail(self, message: str, path: str) -> ConfigError:
        key = path.split(".")[-1].split("[")[0]
        return ConfigError(message, path=path, line=_line_of(self.source_text, key))

    def validate(self) -> None:
        """Check every field and build the game once.

        Raises:
            ConfigError: On the first problem found
        """
        if not isinstance(self.name, str) or not self.name:
            raise self._fail("name must be a non-empty string", "name")
        if not isinstance(self.T, int) or isinstance(self.T, bool) or self.T < 1:
            raise self._fail("T must be a positive integer", "T")
        if (not isinstance(self.seeds, list) or not self.seeds
                or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in self.seeds)):
            raise self._fail("seeds must be a non-empty list of nonnegative integers", "seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise self._fail("seeds must be distinct", "seeds")
        if self.metric_stride is not None and (not isinstance(self.metric_stride, int) or self.metric_stride < 1):
            raise self._fail("metric_stride must be a positive integer", "metric_stride")
        if self.init not in INIT_MODES:
            raise self._fail(f"init must be one of {INIT_MODES}", "init")
        if not isinstance(self.output, str):
            raise self._fail("output must be a path string", "output")
        self._validate_schedule()
        self._validate_adversary()
        self.build_game()

    def _validate_schedule(self) -> None:
        if not isinstance(self.schedule, dict):
            raise self._fail("schedule must be an object", "schedule")
        unknown = set(self.schedule) - {"preset", "c_gamma", "c_mu"}
        if unknown:
            raise self._fail(f"Unknown schedule field(s): {', '.join(sorted(unknown))}", "schedule")
        if self.schedule.get("preset", "default") not in SCHEDULE_PRESETS:
            raise self._fail(f"preset must be one of {SCHEDULE_PRESETS}", "schedule.preset")
        for key in ("c_gamma", "c_mu"):
            value = self.schedule.get(key)
            if value is not None and (not isinstance(value, (int, float)) or value <= 0):
                raise self._fail(f"{key} must be a positive number", f"schedule.{key}")

    def _validate_adversary(self) -> None:
        if self.adversary is None:
            return
        if not isinstance(self.adversary, dict):
            raise self._fail("adversary must be an object", "adversary")
        if self.adversary.get("kind") not in ADVERSARY_KINDS:
            raise self._fail(f"adversary.kind must be one of {ADVERSARY_KINDS}", "adversary.kind")
        c_max = self.adversary.get("c_max", 1.0)
        if not isinstance(c_max, (int, float)) or c_max <= 0:
            raise self._fail("adversary.c_max must be a positive number", "adversary.c_max")

    # Builders

    def build_graph(self) -> Dag:
        spec = self.graph
        if not isinstance(spec, dict):
            raise self._fail("graph must be an object", "graph")
        generator = spec.get("generator")
        if generator is not None:
            if generator not in GENERATORS:
                raise self._fail(f"generator must be one of {GENERATORS}", "graph.generator")
            try:
                if generator == "chain":
                    spec = gen_chain(int(spec.get("segments", 0)), int(spec.get("edges_per_segment", 0)))
                else:
                    spec = gen_parallel(int(spec.get("edges", 0)))
            except (TypeError, ValueError) as e:
                raise self._fail(str(e), "graph.generator") from e

        nodes, edges = spec.get("nodes"), spec.get("edges")
        if not isinstance(nodes, int) or nodes < 2:
            raise self._fail("graph.nodes must be an integer >= 2", "graph.nodes")
        if not isinstance(edges, list) or not edges:
            raise self._fail("graph.edges must be a non-empty list of [tail, head] pairs", "graph.edges")
        for idx, pair in enumerate(edges):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2 or not all(isinstance(v, int) for v in pair):
                raise self._fail(f"edge {idx} must be a [tail, head] pair of integers", f"graph.edges[{idx}]")
        try:
            return build_dag(nodes, edges)
        except CongestionError as e:
            raise self._fail(str(e), "graph.edges") from e

    def agent_pairs(self) -> List[List[int]]:
        """Agents as ``[source, sink]`` pairs; defaults route first node to last."""
        agents = self.agents
        nodes = self.build_graph().node_count
        if agents is None:
            return [[0, nodes - 1]]
        if isinstance(agents, dict):
            count = agents.get("count")
            if not isinstance(count, int) or count < 1:
                raise self._fail("agents.count must be a positive integer", "agents.count")
            return [[0, nodes - 1] for _ in range(count)]
        if not isinstance(agents, list) or not agents:
            raise self._fail("agents must be a non-empty list of [source, sink] pairs or {count: n}", "agents")
        for idx, pair in enumerate(agents):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2 or not all(isinstance(v, int) for v in pair):
                raise self._fail(f"agent {idx} must be a [source, sink] pair", f"agents[{idx}]")
        return [list(pair) for pair in agents]

    def _floats(self, value: Any, path: str) -> np.ndarray:
        try:
            out = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            out = None
        if out is None or not np.all(np.isfinite(out)):
            raise self._fail("costs must be finite numbers", path)
        return out

    def cost_tables(self, m: int, n: int) -> np.ndarray:
        costs = self.costs
        if not isinstance(costs, dict) or len(costs) != 1:
            raise self._fail("costs must hold exactly one of table, affine, random_affine", "costs")
        kind, value = next(iter(costs.items()))
        if kind == "table":
            tables = self._floats(value, "costs.table")
            if tables.shape != (m, n + 1):
                raise self._fail(f"cost table must have {m} rows of {n + 1} values", "costs.table")
            return tables
        if kind == "affine":
            coeffs = self._floats(value, "costs.affine")
            if coeffs.shape == (2,):
                a, b = coeffs
            elif coeffs.shape == (m, 2):
                a, b = coeffs[:, 0], coeffs[:, 1]
            else:
                raise self._fail(f"affine costs must be [a, b] or {m} rows of [a, b]", "costs.affine")
            if np.any(np.asarray(a) < 0):
                raise self._fail("affine slope a must be >= 0", "costs.affine")
            if np.any(np.asarray(b) < 0):
                raise self._fail("affine offset b must be >= 0", "costs.affine")
            return affine_tables(a, b, m, n)
        if kind == "random_affine":
            if not isinstance(value, dict):
                raise self._fail("random_affine must be an object", "costs.random_affine")
            a_range = self._floats(value.get("a", [0.0, 1.0]), "costs.random_affine")
            b_range = self._floats(value.get("b", [0.0, 0.0]), "costs.random_affine")
            if a_range.shape != (2,) or b_range.shape != (2,):
                raise self._fail("random_affine ranges must be [low, high] pairs", "costs.random_affine")
            (a_lo, a_hi), (b_lo, b_hi) = a_range, b_range
            if not 0 <= a_lo <= a_hi or not 0 <= b_lo <= b_hi:
                raise self._fail("random_affine ranges must satisfy 0 <= low <= high", "costs.random_affine")
            seed = value.get("seed", 0)
            if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
                raise self._fail("random_affine seed must be a nonnegative integer", "costs.random_affine")
            rng = np.random.default_rng(seed)
            a = rng.uniform(a_lo, a_hi, size=m)
            b = rng.uniform(b_lo, b_hi, size=m)
            return affine_tables(a, b, m, n)
        raise self._fail(f"Unknown cost kind '{kind}'", "costs")

    def build_game(self) -> CongestionGame:
        graph = self.build_graph()
        agents = self.agent_pairs()
        tables = self.cost_tables(graph.edge_count, len(agents))
        try:
            return make_game(graph, agents, tables)
        except CongestionError as e:
            raise self._fail(str(e), "agents") from e
        except ValueError as e:
            raise self._fail(str(e), "costs") from e

    def adversary_spec(self) -> AdversarySpec:
        spec = dict(self.adversary or {"kind": "iid_random"})
        kind = spec.pop("kind")
        c_max = float(spec.pop("c_max", 1.0))
        return AdversarySpec(kind=kind, c_max=c_max, data=spec)

    @property
    def preset(self) -> str:
        return self.schedule.get("preset", "default")

    @property
    def c_gamma(self) -> Optional[float]:
        return self.schedule.get("c_gamma")

    @property
    def c_mu(self) -> Optional[float]:
        return self.schedule.get("c_mu")

    def describe(self) -> List[List[Any]]:
        """Key facts for a summary table."""
        game = self.build_game()
        return [
            ["name", self.name],
            ["nodes", game.graph.node_count],
            ["edges", game.m],
            ["agents", game.n],
            ["c_max", game.c_max],
            ["schedule", self.preset],
            ["init", self.init],
            ["T", self.T],
            ["seeds", ", ".join(str(s) for s in self.seeds)],
            ["metric_stride", self.metric_stride or "auto"],
            ["adversary", (self.adversary or {}).get("kind", "-")],
        ]
