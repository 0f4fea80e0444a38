"""Euclidean projection onto bounded-away path polytopes.

Two solvers produce the same minimizer:

* Dykstra's alternating projection between the unit-flow affine subspace
  (closed form through the cached normal equations) and the box
  ``[mu, 1]`` on active edges. Works for every DAG.
* An exact sort-based projection when the active subgraph is a chain of
  parallel-edge bundles, where the polytope is a product of lower-bounded
  simplices.

``method="auto"`` picks the exact solver whenever the polytope supports it.
"""

import logging
from typing import List, Optional, Union

import numpy as np

from src.errors import Infeasible, InvalidNode, MuTooLarge, NotInPolytope, ProjectionDiverged, Unreachable
from src.models.base import EPS_FEAS, EPS_PROJ, MAX_PROJ_ITERS, PROJ_DIVERGENCE_RESIDUAL
from src.models.graph import Dag
from src.models.polytope import BoundedAwayView, FractionalStrategy, PathPolytope
from src.services.graph_service import active_edges, find_positive_path

logger = logging.getLogger(__name__)

# Slack when comparing mu against 1/|E_i| so that mu = 1/k computed elsewhere is accepted.
_MU_SLACK = 1e-12

PROJECTION_METHODS = ("auto", "dykstra", "bundles")


def _detect_bundles(g: Dag, s: int, t: int, active: List[int]) -> Optional[tuple]:
    """Edge-id bundles if the active subgraph is a chain of parallel bundles."""
    heads_of = {}
    for e in active:
        heads_of.setdefault(g.tails[e], set()).add(g.heads[e])
    bundles = []
    v = s
    visited = 0
    while v != t:
        heads = heads_of.get(v)
        if heads is None or len(heads) != 1:
            return None
        (w,) = heads
        bundles.append(np.array([e for e in active if g.tails[e] == v], dtype=int))
        visited += 1
        v = w
    if visited != len(heads_of):
        return None
    return tuple(bundles)


def make_polytope(g: Dag, s: int, t: int) -> PathPolytope:
    """Build the s–t path polytope and cache its flow system.

    Raises:
        Unreachable: If there is no s→t path
    """
    active = sorted(active_edges(g, s, t))
    if not active:
        raise Unreachable(f"Node {t} is not reachable from {s}")

    nodes = sorted({g.tails[e] for e in active} | {g.heads[e] for e in active})
    rows = [v for v in nodes if v != t]
    row_of = {v: i for i, v in enumerate(rows)}
    flow_matrix = np.zeros((len(rows), len(active)))
    for j, e in enumerate(active):
        flow_matrix[row_of[g.tails[e]], j] += 1.0
        if g.heads[e] != t:
            flow_matrix[row_of[g.heads[e]], j] -= 1.0
    flow_rhs = np.zeros(len(rows))
    flow_rhs[row_of[s]] = 1.0

    # Active subgraph is connected, so dropping the sink row leaves full row rank.
    gram = flow_matrix @ flow_matrix.T
    affine_correction = flow_matrix.T @ np.linalg.inv(gram)

    polytope = PathPolytope(
        graph=g,
        source=s,
        sink=t,
        active=frozenset(active),
        active_idx=np.array(active, dtype=int),
        flow_matrix=flow_matrix,
        flow_rhs=flow_rhs,
        affine_correction=affine_correction,
        bundles=_detect_bundles(g, s, t, active),
    )
    logger.debug(
        f"Path polytope {s}->{t}: {len(active)} active edges, "
        f"{'bundle chain' if polytope.bundles is not None else 'general DAG'}"
    )
    return polytope


def bounded_view(p: PathPolytope, mu: float) -> BoundedAwayView:
    """Bounded-away restriction of ``p``.

    Raises:
        MuTooLarge: If ``mu > 1/|active|`` (the view would be empty)
    """
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    if mu > p.max_mu + _MU_SLACK:
        raise MuTooLarge(f"mu={mu} exceeds 1/|E_i| = {p.max_mu}")
    return BoundedAwayView(base=p, mu=float(mu))


def is_member(p: Union[PathPolytope, BoundedAwayView], x: np.ndarray, tol: float = EPS_FEAS) -> bool:
    """Membership test for a path polytope or its bounded-away view."""
    mu = 0.0
    if isinstance(p, BoundedAwayView):
        p, mu = p.base, p.mu
    x = np.asarray(x, dtype=float)
    if x.shape != (p.m,) or not np.all(np.isfinite(x)):
        return False
    inactive = np.ones(p.m, dtype=bool)
    inactive[p.active_idx] = False
    if np.any(np.abs(x[inactive]) > tol):
        return False
    xa = x[p.active_idx]
    if np.any(xa < mu - tol) or np.any(xa > 1.0 + tol):
        return False
    return p.flow_residual(x) <= tol


def feasible_bounded_point(p: BoundedAwayView) -> FractionalStrategy:
    """Uniform average of one covering path per active edge.

    Every active edge is covered by its own path, so each coordinate is at
    least ``1/|E_i| >= mu``.
    """
    base = p.base
    if p.mu > base.max_mu + _MU_SLACK:
        raise MuTooLarge(f"mu={p.mu} exceeds 1/|E_i| = {base.max_mu}")
    support = np.zeros(base.m)
    support[base.active_idx] = 1.0
    x = np.zeros(base.m)
    for e in base.active_idx:
        path = find_positive_path(base.graph, base.source, base.sink, support, int(e))
        x[list(path.edge_ids)] += 1.0
    return x / base.active_count


def project_simplex_lb(y: np.ndarray, mu: float) -> np.ndarray:
    """Exact projection onto ``{x : Σx = 1, x >= mu}``.

    Accepts a vector or a 2-D array whose rows are projected independently.
    Shifting by ``mu`` reduces the problem to the simplex of radius
    ``1 - n·mu`` which is solved by the sort-and-threshold rule.

    Raises:
        Infeasible: If ``mu · n > 1``
    """
    y = np.asarray(y, dtype=float)
    rows = np.atleast_2d(y)
    n = rows.shape[1]
    if mu * n > 1.0 + _MU_SLACK:
        raise Infeasible(f"mu={mu} with n={n} gives mu*n > 1")
    radius = max(1.0 - n * mu, 0.0)
    if radius == 0.0:
        out = np.full(rows.shape, float(mu))
        return out.reshape(y.shape)

    z = rows - mu
    u = -np.sort(-z, axis=1)
    css = np.cumsum(u, axis=1) - radius
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(rows.shape[0]), rho] / (rho + 1)
    out = np.maximum(z - theta[:, None], 0.0) + mu
    return out.reshape(y.shape)


def _project_bundles(p: PathPolytope, y: np.ndarray, mu: float) -> np.ndarray:
    x = np.zeros(p.m)
    by_size = {}
    for bundle in p.bundles:
        by_size.setdefault(len(bundle), []).append(bundle)
    for group in by_size.values():
        idx = np.stack(group)
        x[idx] = project_simplex_lb(y[idx], mu)
    return x


def _affine(p: PathPolytope, z: np.ndarray) -> np.ndarray:
    return z - p.affine_correction @ (p.flow_matrix @ z - p.flow_rhs)


def _project_dykstra(p: PathPolytope, y: np.ndarray, mu: float) -> np.ndarray:
    x = y[p.active_idx].copy()
    corr_affine = np.zeros_like(x)
    corr_box = np.zeros_like(x)
    step = residual = np.inf
    for iteration in range(1, MAX_PROJ_ITERS + 1):
        a = _affine(p, x + corr_affine)
        corr_affine = x + corr_affine - a
        x_new = np.clip(a + corr_box, mu, 1.0)
        corr_box = a + corr_box - x_new
        step = float(np.linalg.norm(x_new - x))
        residual = float(np.max(np.abs(p.flow_matrix @ x_new - p.flow_rhs)))
        x = x_new
        if step < EPS_PROJ and residual < EPS_PROJ:
            logger.debug(f"Dykstra converged in {iteration} iterations")
            break
    else:
        worst = max(step, residual)
        if worst > PROJ_DIVERGENCE_RESIDUAL:
            raise ProjectionDiverged(f"Projection did not converge in {MAX_PROJ_ITERS} iterations (residual {worst:.3e})")
        logger.warning(f"Projection reached {MAX_PROJ_ITERS} iterations with residual {worst:.3e}")

    # A last affine step makes flow conservation exact whenever it keeps the bounds
    exact = _affine(p, x)
    if np.all(exact >= mu) and np.all(exact <= 1.0):
        x = exact

    out = np.zeros(p.m)
    out[p.active_idx] = x
    return out


def project(p: BoundedAwayView, y: np.ndarray, method: str = "auto") -> FractionalStrategy:
    """Euclidean projection of ``y`` onto the bounded-away polytope.

    Inactive coordinates are pinned to zero; only active edges take part in
    the optimization.

    Args:
        p: Bounded-away view to project onto
        y: Point of length ``m``
        method: ``"auto"``, ``"dykstra"`` or ``"bundles"``

    Raises:
        MuTooLarge: If the view is empty
        ProjectionDiverged: If Dykstra fails to converge
    """
    base = p.base
    y = np.asarray(y, dtype=float)
    if y.shape != (base.m,):
        raise ValueError(f"Expected a vector of length {base.m}, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("Cannot project a non-finite point")
    if p.mu > base.max_mu + _MU_SLACK:
        raise MuTooLarge(f"mu={p.mu} exceeds 1/|E_i| = {base.max_mu}")
    mu = min(p.mu, base.max_mu)

    if method == "auto":
        method = "bundles" if base.bundles is not None else "dykstra"
    if method == "bundles":
        if base.bundles is None:
            raise ValueError("Bundle projection requires a chain of parallel-edge bundles")
        return _project_bundles(base, y, mu)
    if method == "dykstra":
        return _project_dykstra(base, y, mu)
    raise ValueError(f"Unknown projection method: {method}")


def epsilon_greedy(x: np.ndarray, eps: float) -> np.ndarray:
    """Uniform mixing on the simplex: ``(1 - eps)·x + eps/n``."""
    x = np.asarray(x, dtype=float)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    return (1.0 - eps) * x + eps / x.shape[-1]


def epsilon_greedy_path(p: PathPolytope, x: np.ndarray, eps: float) -> FractionalStrategy:
    """Mix ``x`` with the covering-path average instead of projecting.

    On a simplex the covering-path average is the uniform point, so this
    agrees with ``epsilon_greedy``.
    """
    if not is_member(p, x):
        raise NotInPolytope("epsilon-greedy mixing needs a point of the path polytope")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    uniform = feasible_bounded_point(bounded_view(p, p.max_mu))
    return (1.0 - eps) * np.asarray(x, dtype=float) + eps * uniform


def agent_polytopes(g: Dag, agents: List[tuple]) -> List[PathPolytope]:
    """One path polytope per ``(source, sink)`` pair."""
    polytopes = []
    for idx, (s, t) in enumerate(agents):
        try:
            polytopes.append(make_polytope(g, s, t))
        except (Unreachable, InvalidNode) as e:
            raise type(e)(f"Agent {idx}: {e}") from e
    return polytopes
