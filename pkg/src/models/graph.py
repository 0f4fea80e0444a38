"""Directed acyclic multigraph and path types."""

from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np


@dataclass(frozen=True)
class Dag:
    """Edge-indexed directed acyclic multigraph.

    Edge ``e`` goes from ``tails[e]`` to ``heads[e]``; parallel edges are
    distinct edge ids. Adjacency lists are sorted by edge id. Build instances
    with ``graph_service.build_dag`` which verifies acyclicity.
    """

    node_count: int
    tails: Tuple[int, ...]
    heads: Tuple[int, ...]
    topo_order: Tuple[int, ...] = field(compare=False)
    out_edges: Tuple[Tuple[int, ...], ...] = field(compare=False, repr=False)
    in_edges: Tuple[Tuple[int, ...], ...] = field(compare=False, repr=False)

    @property
    def edge_count(self) -> int:
        return len(self.tails)

    @property
    def edges(self) -> Tuple[Tuple[int, int, int], ...]:
        """Edges as ``(edge_id, tail, head)`` triples."""
        return tuple((e, self.tails[e], self.heads[e]) for e in range(self.edge_count))


@dataclass(frozen=True)
class Path:
    """Ordered edge ids of a simple directed path."""

    edge_ids: Tuple[int, ...]

    def __iter__(self) -> Iterator[int]:
        return iter(self.edge_ids)

    def __len__(self) -> int:
        return len(self.edge_ids)

    def __contains__(self, edge_id: object) -> bool:
        return edge_id in self.edge_ids

    def indicator(self, m: int) -> np.ndarray:
        """0/1 vector of length ``m`` with ones on the path's edges."""
        x = np.zeros(m)
        x[list(self.edge_ids)] = 1.0
        return x

    def to_list(self) -> list:
        return list(self.edge_ids)
