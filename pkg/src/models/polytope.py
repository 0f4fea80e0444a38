"""Path polytopes, their bounded-away restrictions and path mixtures."""

from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

import numpy as np

from src.models.graph import Dag, Path

# A fractional strategy is a plain float vector of length m (one marginal per edge).
FractionalStrategy = np.ndarray


@dataclass(frozen=True)
class PathPolytope:
    """Convex hull of the s→t path indicators of a DAG.

    Built by ``projection_service.make_polytope`` which caches the flow
    system restricted to active edges:

    * ``flow_matrix`` / ``flow_rhs``: node-edge incidence rows (sink row
      dropped, so full row rank) and the unit-flow right-hand side.
    * ``affine_correction``: ``Aᵀ(AAᵀ)⁻¹``, the factorized normal equations of
      the equality-constrained least-squares step.
    * ``bundles``: when the active subgraph is a chain of parallel-edge
      bundles, the edge ids of each bundle; the polytope is then a product of
      simplices.
    """

    graph: Dag
    source: int
    sink: int
    active: FrozenSet[int]
    active_idx: np.ndarray = field(compare=False, repr=False)
    flow_matrix: np.ndarray = field(compare=False, repr=False)
    flow_rhs: np.ndarray = field(compare=False, repr=False)
    affine_correction: np.ndarray = field(compare=False, repr=False)
    bundles: Optional[Tuple[np.ndarray, ...]] = field(default=None, compare=False, repr=False)

    @property
    def m(self) -> int:
        """Dimension of the ambient space (all graph edges)."""
        return self.graph.edge_count

    @property
    def active_count(self) -> int:
        return len(self.active)

    @property
    def max_mu(self) -> float:
        """Largest exploration floor for which the bounded-away view is nonempty."""
        return 1.0 / self.active_count

    def flow_residual(self, x: np.ndarray) -> float:
        """Max violation of unit flow conservation over all nodes."""
        g = self.graph
        net = np.zeros(g.node_count)
        np.add.at(net, np.asarray(g.tails, dtype=int), x)
        np.subtract.at(net, np.asarray(g.heads, dtype=int), x)
        net[self.source] -= 1.0
        net[self.sink] += 1.0
        return float(np.max(np.abs(net)))


@dataclass(frozen=True)
class BoundedAwayView:
    """Path polytope intersected with ``x_e >= mu`` on every active edge."""

    base: PathPolytope
    mu: float


@dataclass(frozen=True)
class PathMix:
    """Distribution over paths given as ``(path, weight)`` atoms."""

    atoms: Tuple[Tuple[Path, float], ...]

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @property
    def paths(self) -> Tuple[Path, ...]:
        return tuple(p for p, _ in self.atoms)

    def marginals(self, m: int) -> np.ndarray:
        """Edge marginals ``Σ_atoms weight · 1[e ∈ path]``."""
        x = np.zeros(m)
        for path, weight in self.atoms:
            x[list(path.edge_ids)] += weight
        return x

    def to_dict(self) -> dict:
        return {"atoms": [{"path": path.to_list(), "w": weight} for path, weight in self.atoms]}
