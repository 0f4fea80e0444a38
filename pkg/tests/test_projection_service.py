"""Tests for path polytopes and projections onto their bounded-away views."""

import numpy as np
import pytest

from src.errors import Infeasible, MuTooLarge, NotInPolytope, Unreachable
from src.services.experiment_config import gen_chain
from src.services.graph_service import build_dag
from src.services.projection_service import (
    bounded_view,
    epsilon_greedy,
    epsilon_greedy_path,
    feasible_bounded_point,
    is_member,
    make_polytope,
    project,
    project_simplex_lb,
)


@pytest.mark.unit
class TestMakePolytope:
    """Tests for make_polytope and membership."""

    def test_active_edges_cached(self, diamond_polytope):
        assert diamond_polytope.active == frozenset(range(5))
        assert diamond_polytope.active_count == 5
        assert diamond_polytope.max_mu == pytest.approx(0.2)

    def test_bundle_detection(self, simplex3, diamond_polytope, chain_3x3):
        assert simplex3.bundles is not None
        assert len(simplex3.bundles) == 1
        assert diamond_polytope.bundles is None
        chain = make_polytope(chain_3x3, 0, 3)
        assert [b.tolist() for b in chain.bundles] == [[0, 1, 2], [3, 4, 5], [6, 7, 8]]

    def test_unreachable(self):
        g = build_dag(3, [(0, 1), (2, 1)])
        with pytest.raises(Unreachable):
            make_polytope(g, 0, 2)

    def test_inactive_edges_must_be_zero(self):
        g = build_dag(3, [(0, 1), (0, 1), (2, 1)])
        p = make_polytope(g, 0, 1)
        assert is_member(p, np.array([0.5, 0.5, 0.0]))
        assert not is_member(p, np.array([0.5, 0.5, 0.1]))

    def test_membership(self, diamond_polytope):
        assert is_member(diamond_polytope, np.array([1.0, 0.0, 1.0, 0.0, 0.0]))
        assert is_member(diamond_polytope, np.array([0.7, 0.3, 0.2, 0.8, 0.5]))
        assert not is_member(diamond_polytope, np.array([0.7, 0.3, 0.2, 0.8, 0.4]))
        assert not is_member(diamond_polytope, np.array([1.0, 0.0, 1.0]))

    def test_bounded_membership(self, simplex3):
        view = bounded_view(simplex3, 0.12)
        assert is_member(view, np.array([0.74, 0.14, 0.12]))
        assert not is_member(view, np.array([0.8, 0.2, 0.0]))
        assert is_member(simplex3, np.array([0.8, 0.2, 0.0]))


@pytest.mark.unit
class TestFeasibleBoundedPoint:
    """Tests for feasible_bounded_point."""

    def test_two_parallel_edges(self, parallel2):
        view = bounded_view(make_polytope(parallel2, 0, 1), 0.5)
        assert feasible_bounded_point(view).tolist() == [0.5, 0.5]

    def test_mu_too_large(self, parallel2):
        with pytest.raises(MuTooLarge):
            bounded_view(make_polytope(parallel2, 0, 1), 0.6)

    def test_diamond(self, diamond):
        view = bounded_view(make_polytope(diamond, 0, 3), 0.25)
        x = feasible_bounded_point(view)
        assert is_member(view, x)
        assert np.all(x >= 0.25)

    def test_diamond_with_shortcut(self, diamond_polytope):
        view = bounded_view(diamond_polytope, diamond_polytope.max_mu)
        assert is_member(view, feasible_bounded_point(view))


@pytest.mark.unit
class TestProjectSimplexLb:
    """Tests for project_simplex_lb."""

    def test_bounded_away_example(self):
        out = project_simplex_lb(np.array([0.8, 0.2, 0.0]), 0.12)
        np.testing.assert_allclose(out, [0.74, 0.14, 0.12], atol=1e-12)

    def test_uniform_is_fixed(self):
        y = np.full(4, 0.25)
        np.testing.assert_allclose(project_simplex_lb(y, 0.1), y, atol=1e-15)

    def test_large_coordinate(self):
        np.testing.assert_allclose(project_simplex_lb(np.array([10.0, 0.0, 0.0]), 0.1), [0.8, 0.1, 0.1], atol=1e-12)

    def test_rows_projected_independently(self):
        y = np.array([[0.8, 0.2, 0.0], [10.0, 0.0, 0.0]])
        out = project_simplex_lb(y, 0.1)
        np.testing.assert_allclose(out[1], [0.8, 0.1, 0.1], atol=1e-12)
        np.testing.assert_allclose(out.sum(axis=1), [1.0, 1.0])

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            project_simplex_lb(np.zeros(3), 0.4)

    def test_mu_at_limit(self):
        np.testing.assert_allclose(project_simplex_lb(np.array([5.0, -1.0]), 0.5), [0.5, 0.5])


@pytest.mark.unit
class TestProject:
    """Tests for project."""

    def test_point_inside_is_unchanged(self, parallel2):
        view = bounded_view(make_polytope(parallel2, 0, 1), 0.12)
        y = np.array([2 / 3, 1 / 3])
        for method in ("dykstra", "bundles"):
            np.testing.assert_allclose(project(view, y, method=method), y, atol=1e-10)

    @pytest.mark.parametrize("method", ["auto", "dykstra", "bundles"])
    def test_simplex_example(self, simplex3, method):
        out = project(bounded_view(simplex3, 0.12), np.array([0.8, 0.2, 0.0]), method=method)
        np.testing.assert_allclose(out, [0.74, 0.14, 0.12], atol=1e-8)

    def test_bundles_rejected_on_general_dag(self, diamond_polytope):
        with pytest.raises(ValueError):
            project(bounded_view(diamond_polytope, 0.1), np.zeros(5), method="bundles")

    def test_unknown_method(self, simplex3):
        with pytest.raises(ValueError):
            project(bounded_view(simplex3, 0.1), np.zeros(3), method="newton")

    def test_inactive_coordinates_pinned(self):
        g = build_dag(3, [(0, 1), (0, 1), (2, 1)])
        p = make_polytope(g, 0, 1)
        out = project(bounded_view(p, 0.1), np.array([0.2, 0.9, 5.0]))
        assert out[2] == 0.0
        assert is_member(bounded_view(p, 0.1), out)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_qp_oracle(self, diamond_polytope, qp_oracle, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(0.4, 0.6, size=5)
        out = project(bounded_view(diamond_polytope, 0.1), y)
        np.testing.assert_allclose(out, qp_oracle(diamond_polytope, y, 0.1), atol=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_chain_bundles_agree_with_dykstra(self, chain_3x3, seed):
        p = make_polytope(chain_3x3, 0, 3)
        view = bounded_view(p, 0.05)
        y = np.random.default_rng(seed).normal(0.3, 1.0, size=9)
        np.testing.assert_allclose(project(view, y, "bundles"), project(view, y, "dykstra"), atol=1e-6)

    def test_properties_on_random_points(self, diamond_polytope):
        rng = np.random.default_rng(7)
        view = bounded_view(diamond_polytope, 0.05)
        for _ in range(20):
            y, z = rng.normal(0.3, 1.0, size=(2, 5))
            py, pz = project(view, y), project(view, z)
            assert is_member(view, py, tol=1e-8)
            np.testing.assert_allclose(project(view, py), py, atol=1e-7)
            assert np.linalg.norm(py - pz) <= np.linalg.norm(y - z) + 1e-8

    def test_nested_views(self, diamond_polytope):
        rng = np.random.default_rng(11)
        inner = bounded_view(diamond_polytope, 0.15)
        outer = bounded_view(diamond_polytope, 0.05)
        for _ in range(10):
            x = project(inner, rng.normal(0.3, 1.0, size=5))
            assert is_member(outer, x, tol=1e-8)

    def test_non_finite_rejected(self, simplex3):
        with pytest.raises(ValueError):
            project(bounded_view(simplex3, 0.1), np.array([np.nan, 0.0, 0.0]))

    def test_nineteen_segment_chain(self):
        spec = gen_chain(19, 2)
        p = make_polytope(build_dag(spec["nodes"], spec["edges"]), 0, 19)
        view = bounded_view(p, 0.01)
        y = np.random.default_rng(3).normal(0.5, 0.5, size=38)
        out = project(view, y)
        assert is_member(view, out, tol=1e-8)


@pytest.mark.unit
class TestEpsilonGreedy:
    """Tests for uniform mixing as the alternative to bounded-away projection."""

    def test_simplex_example(self):
        out = epsilon_greedy(np.array([0.8, 0.2, 0.0]), 0.12)
        np.testing.assert_allclose(out, [0.744, 0.216, 0.04], atol=1e-12)

    def test_two_edges(self):
        out = epsilon_greedy(np.array([2 / 3, 1 / 3]), 0.12)
        np.testing.assert_allclose(out, [0.88 * 2 / 3 + 0.06, 0.88 / 3 + 0.06], atol=1e-12)

    def test_moves_points_already_explored(self):
        # Bounded-away projection leaves (2/3, 1/3) alone; mixing does not
        y = np.array([2 / 3, 1 / 3])
        assert not np.allclose(epsilon_greedy(y, 0.12), y)

    def test_path_version_matches_on_simplex(self, simplex3):
        x = np.array([0.8, 0.2, 0.0])
        np.testing.assert_allclose(epsilon_greedy_path(simplex3, x, 0.12), epsilon_greedy(x, 0.12), atol=1e-12)

    def test_path_version_stays_in_polytope(self, diamond_polytope):
        x = np.array([1.0, 0.0, 1.0, 0.0, 0.0])
        assert is_member(diamond_polytope, epsilon_greedy_path(diamond_polytope, x, 0.3))

    def test_path_version_needs_member(self, diamond_polytope):
        with pytest.raises(NotInPolytope):
            epsilon_greedy_path(diamond_polytope, np.ones(5), 0.1)

    def test_eps_out_of_range(self):
        with pytest.raises(ValueError):
            epsilon_greedy(np.array([1.0, 0.0]), 1.5)
