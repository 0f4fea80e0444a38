"""Tests for experiment configuration loading and validation."""

import json

import numpy as np
import pytest

from src.errors import ConfigError
from src.services.experiment_config import ExperimentConfig, gen_chain, gen_parallel
from src.services.graph_service import build_dag, count_paths


@pytest.mark.unit
class TestGenerators:
    """Tests for the chain and parallel-link generators."""

    def test_smallest_chain(self):
        """One segment of two edges is two parallel links."""
        assert gen_chain(1, 2) == {"nodes": 2, "edges": [[0, 1], [0, 1]]}
        assert gen_parallel(2) == gen_chain(1, 2)

    @pytest.mark.parametrize("k,d,expected", [(3, 3, 27), (18, 2, 2**18), (4, 1, 1)])
    def test_path_counts(self, k, d, expected):
        spec = gen_chain(k, d)
        g = build_dag(spec["nodes"], spec["edges"])
        assert g.edge_count == k * d
        assert count_paths(g, 0, k) == expected

    def test_rejects_empty_chain(self):
        with pytest.raises(ValueError):
            gen_chain(0, 2)


@pytest.mark.unit
class TestExperimentConfigLoading:
    """Tests for ExperimentConfig.from_file and from_dict."""

    def test_load_from_json(self, config_file):
        """Test loading the two-link configuration from JSON."""
        config = ExperimentConfig.from_file(config_file)
        assert config.name == "pair"
        assert config.T == 60
        assert config.seeds == [7]
        assert config.metric_stride == 10
        game = config.build_game()
        assert (game.n, game.m) == (2, 2)
        assert game.cost_tables.tolist() == [[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]]

    def test_load_from_yaml(self, tmp_path):
        """Test loading a generated graph from YAML."""
        yaml_file = tmp_path / "links.yaml"
        yaml_file.write_text(
            "name: links\n"
            "graph:\n"
            "  generator: parallel\n"
            "  edges: 3\n"
            "agents:\n"
            "  count: 2\n"
            "schedule:\n"
            "  preset: nash_tuned\n"
            "  c_mu: 0.5\n"
            "T: 50\n"
            "seeds: [1, 2]\n"
        )
        config = ExperimentConfig.from_file(yaml_file)
        game = config.build_game()
        assert (game.n, game.m) == (2, 3)
        assert config.preset == "nash_tuned"
        assert config.c_mu == 0.5
        assert config.c_gamma is None

    def test_defaults(self):
        config = ExperimentConfig.from_dict({})
        assert config.agent_pairs() == [[0, 1]]
        assert config.T == 1000
        assert config.metric_stride is None
        assert config.adversary_spec().kind == "iid_random"

    def test_unsupported_extension(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text("T = 5\n")
        with pytest.raises(ConfigError, match="Unsupported file format"):
            ExperimentConfig.from_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read"):
            ExperimentConfig.from_file(tmp_path / "absent.json")

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "name": "x",\n  "T": ,\n}\n')
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.from_file(path)
        assert exc_info.value.line == 3
        assert "Invalid JSON" in str(exc_info.value)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("name: x\nT: [1, 2\n")
        with pytest.raises(ConfigError, match="Invalid YAML"):
            ExperimentConfig.from_file(path)

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(path)

    def test_validation_error_has_path_and_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "name": "x",\n  "T": 0\n}\n')
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.from_file(path)
        assert exc_info.value.path == "T"
        assert exc_info.value.line == 3
        assert str(exc_info.value).startswith("[line 3, T]")

    def test_unknown_field(self, config_dict):
        config_dict["colour"] = "red"
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.from_dict(config_dict)
        assert exc_info.value.path == "colour"


@pytest.mark.unit
class TestExperimentConfigValidation:
    """Field-by-field validation failures."""

    @pytest.mark.parametrize("field,value,path", [
        ("T", True, "T"),
        ("T", -3, "T"),
        ("seeds", [], "seeds"),
        ("seeds", [1, 1], "seeds"),
        ("seeds", [-1], "seeds"),
        ("metric_stride", 0, "metric_stride"),
        ("init", "zeros", "init"),
        ("name", "", "name"),
        ("schedule", {"preset": "adam"}, "schedule.preset"),
        ("schedule", {"c_mu": -1.0}, "schedule.c_mu"),
        ("schedule", {"eta": 1.0}, "schedule"),
        ("adversary", {"kind": "oracle"}, "adversary.kind"),
        ("adversary", {"kind": "adaptive", "c_max": 0}, "adversary.c_max"),
        ("agents", {"count": 0}, "agents.count"),
        ("agents", [[0]], "agents[0]"),
        ("graph", {"nodes": 1, "edges": [[0, 0]]}, "graph.nodes"),
        ("graph", {"nodes": 2, "edges": [[0, 1], [1, 0]]}, "graph.edges"),
        ("graph", {"nodes": 2, "edges": [[0, "1"]]}, "graph.edges[0]"),
        ("graph", {"generator": "grid"}, "graph.generator"),
        ("costs", {"affine": [-1.0, 0.0]}, "costs.affine"),
        ("costs", {"table": [[0.0, 1.0]]}, "costs.table"),
        ("costs", {"cubic": 1}, "costs"),
        ("costs", {"table": [[0.0, "a", 2.0], [0.0, 1.0, 2.0]]}, "costs.table"),
        ("costs", {"table": [[0.0, 1.0], [0.0, 1.0, 2.0]]}, "costs.table"),
        ("costs", {"table": [[0.0, 1.0, None], [0.0, 1.0, 2.0]]}, "costs.table"),
        ("costs", {"affine": "x"}, "costs.affine"),
        ("costs", {"affine": [[1.0, 0.0], {"a": 1}]}, "costs.affine"),
        ("costs", {"random_affine": {"a": ["x", 1]}}, "costs.random_affine"),
        ("costs", {"random_affine": {"a": [0.0, 1.0, 2.0]}}, "costs.random_affine"),
        ("costs", {"random_affine": {"seed": "s"}}, "costs.random_affine"),
    ])
    def test_rejected(self, config_dict, field, value, path):
        config_dict[field] = value
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.from_dict(config_dict)
        assert exc_info.value.path == path

    def test_unreachable_agent(self, config_dict):
        config_dict["agents"] = [[1, 0]]
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.from_dict(config_dict)
        assert exc_info.value.path == "agents"

    def test_config_errors_are_value_errors(self, config_dict):
        config_dict["T"] = 0
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(config_dict)


@pytest.mark.unit
class TestExperimentConfigBuilders:
    """Tests for graph, agent and cost construction."""

    def test_explicit_agents(self):
        config = ExperimentConfig.from_dict({
            "graph": gen_chain(3, 2),
            "agents": [[0, 3], [1, 3], [0, 2]],
        })
        game = config.build_game()
        assert game.agents == ((0, 3), (1, 3), (0, 2))
        assert game.polytopes[1].active_count == 4

    def test_cost_table(self, config_dict):
        config_dict["costs"] = {"table": [[0.0, 1.0, 3.0], [0.0, 2.0, 2.5]]}
        game = ExperimentConfig.from_dict(config_dict).build_game()
        assert game.c_max == 3.0

    def test_per_edge_affine(self, config_dict):
        config_dict["costs"] = {"affine": [[1.0, 0.0], [2.0, 0.5]]}
        game = ExperimentConfig.from_dict(config_dict).build_game()
        assert game.cost_tables[1].tolist() == [0.0, 2.5, 4.5]

    def test_random_affine_is_seeded(self, config_dict):
        config_dict["costs"] = {"random_affine": {"a": [0.5, 2.0], "b": [0.0, 1.0], "seed": 3}}
        first = ExperimentConfig.from_dict(config_dict).build_game().cost_tables
        second = ExperimentConfig.from_dict(config_dict).build_game().cost_tables
        assert np.array_equal(first, second)
        assert np.all(first[:, 1] >= 0.5)

    def test_adversary_spec_data(self, adversarial_config_file):
        spec = ExperimentConfig.from_file(adversarial_config_file).adversary_spec()
        assert spec.kind == "iid_random"
        assert spec.c_max == 1.0
        assert spec.data == {"low": 0.0, "high": 1.0}

    def test_describe(self, config_file):
        rows = dict(ExperimentConfig.from_file(config_file).describe())
        assert rows["agents"] == 2
        assert rows["edges"] == 2
        assert rows["c_max"] == 2.0
        assert rows["adversary"] == "-"


@pytest.mark.unit
class TestExperimentConfigPersistence:
    """Tests for to_file and with_overrides."""

    @pytest.mark.parametrize("suffix", [".json", ".yaml"])
    def test_saved_config_loads_back(self, tmp_path, config_dict, suffix):
        config = ExperimentConfig.from_dict(config_dict)
        path = tmp_path / "nested" / f"saved{suffix}"
        config.to_file(path)
        assert ExperimentConfig.from_file(path).to_dict() == config.to_dict()

    def test_saved_json_lists_agents(self, tmp_path, config_dict):
        path = tmp_path / "saved.json"
        ExperimentConfig.from_dict(config_dict).to_file(path)
        assert json.loads(path.read_text())["agents"] == [[0, 1], [0, 1]]

    def test_overrides(self, config_dict, tmp_path):
        config = ExperimentConfig.from_dict(config_dict)
        changed = config.with_overrides(seeds=3, stride=5, output=str(tmp_path))
        assert changed.seeds == [0, 1, 2]
        assert changed.metric_stride == 5
        assert changed.output == str(tmp_path)
        assert config.seeds == [7]

    def test_overrides_are_validated(self, config_dict):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(config_dict).with_overrides(seeds=0)
