"""Carathéodory decomposition of path-polytope points and path sampling."""

import logging
from typing import List, Tuple

import numpy as np

from src.errors import DecompositionStalled, NoPositivePath, NotInPolytope
from src.models.base import EPS_FEAS, EPS_FLOW
from src.models.graph import Path
from src.models.polytope import FractionalStrategy, PathMix, PathPolytope
from src.services.graph_service import find_positive_path
from src.services.projection_service import is_member

logger = logging.getLogger(__name__)


def caratheodory_decompose(p: PathPolytope, x: FractionalStrategy, check: bool = True) -> PathMix:
    """Decompose ``x`` into at most ``m`` weighted paths with marginals ``x``.

    Repeatedly takes the smallest positive coordinate (lowest edge id on
    ties), finds a positive-support path through it, subtracts that weight
    along the path and records the atom. Each round zeroes at least the
    chosen coordinate, so the loop runs at most ``m`` times. A coordinate of
    at most ``m·EPS_FEAS`` with no positive path through it is dropped and the
    weights are renormalized to sum to one.

    Args:
        p: Polytope containing ``x``
        x: Edge marginals
        check: Run the membership precheck

    Raises:
        NotInPolytope: If ``x`` is not a point of ``p`` within ``EPS_FEAS``
        DecompositionStalled: If an iteration removes no mass
    """
    x = np.asarray(x, dtype=float)
    if check and not is_member(p, x, EPS_FEAS):
        raise NotInPolytope(f"Point is not in the {p.source}->{p.sink} path polytope")

    g = p.graph
    residual = np.zeros(p.m)
    residual[p.active_idx] = x[p.active_idx]
    residual[residual <= EPS_FLOW] = 0.0
    source_out = list(g.out_edges[p.source])

    # Members conserve flow only up to EPS_FEAS, so peeling can strand dust on dead-end edges
    dust = EPS_FEAS * p.m

    atoms: List[Tuple[Path, float]] = []
    for _ in range(p.m + 1):
        if residual[source_out].sum() <= EPS_FLOW:
            break
        support = residual > 0.0
        masked = np.where(support, residual, np.inf)
        e_min = int(np.argmin(masked))
        weight = float(residual[e_min])

        try:
            path = find_positive_path(g, p.source, p.sink, residual, e_min)
        except NoPositivePath:
            if weight > dust:
                raise
            residual[e_min] = 0.0
            continue
        edges = list(path.edge_ids)
        before = int(np.count_nonzero(residual))
        residual[edges] -= weight
        residual[e_min] = 0.0
        residual[residual <= EPS_FLOW] = 0.0
        if np.count_nonzero(residual) >= before:
            raise DecompositionStalled(f"Iteration on edge {e_min} removed no coordinate")
        atoms.append((path, weight))
    else:
        raise DecompositionStalled(f"Decomposition exceeded {p.m} iterations")

    if not atoms:
        raise DecompositionStalled("No path carries flow")
    total = sum(w for _, w in atoms)
    if abs(total - 1.0) > EPS_FLOW:
        atoms = [(path, w / total) for path, w in atoms]

    logger.debug(f"Decomposed into {len(atoms)} paths")
    return PathMix(atoms=tuple(atoms))


def sample_path(mix: PathMix, rng: np.random.Generator) -> Path:
    """Draw one path with probability equal to its weight.

    Consumes exactly one uniform variate from ``rng``.
    """
    u = rng.random()
    cumulative = np.cumsum(mix.weights)
    idx = int(np.searchsorted(cumulative, u * cumulative[-1], side="right"))
    return mix.atoms[min(idx, len(mix.atoms) - 1)][0]


def mix_marginals(mix: PathMix, m: int) -> np.ndarray:
    """Edge marginals of a path mixture."""
    return mix.marginals(m)
