"""Shared fixtures: small graphs, polytopes, games and configurations."""

import itertools
import json

import numpy as np
import pytest

from src.services.experiment_config import gen_chain
from src.services.game_service import affine_tables, make_game
from src.services.graph_service import build_dag
from src.services.projection_service import make_polytope


# ============================================================================
# Graph Fixtures
# ============================================================================

@pytest.fixture
def diamond():
    """0→1, 0→2, 1→3, 2→3: two disjoint routes."""
    return build_dag(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


@pytest.fixture
def diamond_with_shortcut():
    """Diamond plus the cross edge 1→2 (edge 4): three routes, not a bundle chain."""
    return build_dag(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)])


@pytest.fixture
def parallel3():
    """Three parallel edges: the path polytope is the 2-simplex."""
    return build_dag(2, [(0, 1), (0, 1), (0, 1)])


@pytest.fixture
def parallel2():
    return build_dag(2, [(0, 1), (0, 1)])


@pytest.fixture
def chain_3x3():
    spec = gen_chain(3, 3)
    return build_dag(spec["nodes"], spec["edges"])


# ============================================================================
# Polytope Fixtures
# ============================================================================

@pytest.fixture
def simplex3(parallel3):
    return make_polytope(parallel3, 0, 1)


@pytest.fixture
def diamond_polytope(diamond_with_shortcut):
    return make_polytope(diamond_with_shortcut, 0, 3)


def _qp_projection(polytope, y, mu):
    """Exact projection by enumerating which box face each active coordinate sits on."""
    idx = polytope.active_idx
    A, b = polytope.flow_matrix, polytope.flow_rhs
    ya = y[idx]
    best, best_dist = None, np.inf
    for pattern in itertools.product((0, 1, 2), repeat=len(idx)):
        pattern = np.array(pattern)
        x = np.where(pattern == 1, mu, 0.0) + np.where(pattern == 2, 1.0, 0.0)
        free = pattern == 0
        rhs = b - A[:, ~free] @ x[~free]
        if free.any():
            A_f = A[:, free]
            x[free] = ya[free] + np.linalg.pinv(A_f) @ (rhs - A_f @ ya[free])
        if np.max(np.abs(A @ x - b)) > 1e-9:
            continue
        if np.any(x < mu - 1e-9) or np.any(x > 1 + 1e-9):
            continue
        dist = np.linalg.norm(x - ya)
        if dist < best_dist:
            best, best_dist = x, dist
    out = np.zeros(polytope.m)
    out[idx] = best
    return out


@pytest.fixture
def qp_oracle():
    """Brute-force active-set solver for small projections."""
    return _qp_projection


# ============================================================================
# Game Fixtures
# ============================================================================

@pytest.fixture
def two_link_game(parallel2):
    """Two agents on two parallel links with c(l) = l."""
    return make_game(parallel2, [(0, 1), (0, 1)], affine_tables(1.0, 0.0, 2, 2))


@pytest.fixture
def diamond_game(diamond_with_shortcut):
    """Three agents on the diamond with shortcut, heterogeneous affine costs."""
    a = [1.0, 2.0, 2.0, 1.0, 0.5]
    b = [0.0, 0.5, 0.5, 0.0, 0.0]
    return make_game(diamond_with_shortcut, [(0, 3)] * 3, affine_tables(a, b, 5, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ============================================================================
# Configuration Fixtures
# ============================================================================

@pytest.fixture
def config_dict():
    return {
        "name": "pair",
        "graph": {"nodes": 2, "edges": [[0, 1], [0, 1]]},
        "agents": {"count": 2},
        "costs": {"affine": [1.0, 0.0]},
        "schedule": {"preset": "default"},
        "init": "feasible_construction",
        "T": 60,
        "seeds": [7],
        "metric_stride": 10,
        "output": "results",
    }


@pytest.fixture
def config_file(tmp_path, config_dict):
    config_dict = dict(config_dict, output=str(tmp_path / "out"))
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(config_dict, indent=2))
    return path


@pytest.fixture
def adversarial_config_file(tmp_path):
    data = {
        "name": "adv",
        "graph": {"generator": "chain", "segments": 2, "edges_per_segment": 2},
        "costs": {"affine": [1.0, 0.0]},
        "schedule": {"preset": "regret_optimal"},
        "T": 80,
        "seeds": [0],
        "metric_stride": 10,
        "adversary": {"kind": "iid_random", "c_max": 1.0, "low": 0.0, "high": 1.0},
        "output": str(tmp_path / "adv_out"),
    }
    path = tmp_path / "adv.json"
    path.write_text(json.dumps(data, indent=2))
    return path
