"""Reachability, shortest-path and enumeration oracles over DAGs.

All functions are pure; tie-breaking is always by lowest edge id so that
simulations replay exactly.
"""

import heapq
import logging
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.errors import CapExceeded, CycleDetected, InvalidNode, NoPositivePath, Unreachable
from src.models.base import EPS_FLOW
from src.models.graph import Dag, Path

logger = logging.getLogger(__name__)


def build_dag(nodes: int, edge_list: Iterable[Sequence[int]]) -> Dag:
    """Build a DAG from ``(tail, head)`` pairs; edge ids follow list order.

    Args:
        nodes: Number of nodes (at least 2)
        edge_list: Iterable of ``(tail, head)`` pairs

    Returns:
        Dag with cached topological order and adjacency lists

    Raises:
        InvalidNode: If an endpoint is out of range or ``nodes < 2``
        CycleDetected: If the edges contain a directed cycle (self-loops included)
    """
    if nodes < 2:
        raise InvalidNode(f"A graph needs at least 2 nodes, got {nodes}")

    tails: List[int] = []
    heads: List[int] = []
    for idx, pair in enumerate(edge_list):
        tail, head = int(pair[0]), int(pair[1])
        for endpoint in (tail, head):
            if not 0 <= endpoint < nodes:
                raise InvalidNode(f"Edge {idx} endpoint {endpoint} outside 0..{nodes - 1}")
        tails.append(tail)
        heads.append(head)

    out_edges: List[List[int]] = [[] for _ in range(nodes)]
    in_edges: List[List[int]] = [[] for _ in range(nodes)]
    for e, (tail, head) in enumerate(zip(tails, heads)):
        out_edges[tail].append(e)
        in_edges[head].append(e)

    # Kahn's algorithm, smallest ready node first
    in_degree = [len(in_edges[v]) for v in range(nodes)]
    ready = [v for v in range(nodes) if in_degree[v] == 0]
    heapq.heapify(ready)
    order: List[int] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for e in out_edges[v]:
            w = heads[e]
            in_degree[w] -= 1
            if in_degree[w] == 0:
                heapq.heappush(ready, w)

    if len(order) != nodes:
        stuck = sorted(v for v in range(nodes) if in_degree[v] > 0)
        raise CycleDetected(f"Directed cycle through nodes {stuck}")

    return Dag(
        node_count=nodes,
        tails=tuple(tails),
        heads=tuple(heads),
        topo_order=tuple(order),
        out_edges=tuple(tuple(adj) for adj in out_edges),
        in_edges=tuple(tuple(adj) for adj in in_edges),
    )


def _check_endpoints(g: Dag, s: int, t: int) -> None:
    for node in (s, t):
        if not 0 <= node < g.node_count:
            raise InvalidNode(f"Node {node} outside 0..{g.node_count - 1}")
    if s == t:
        raise InvalidNode(f"Source and sink coincide ({s})")


def _forward_reach(g: Dag, s: int) -> Set[int]:
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        for e in g.out_edges[v]:
            w = g.heads[e]
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _backward_reach(g: Dag, t: int) -> Set[int]:
    seen = {t}
    stack = [t]
    while stack:
        v = stack.pop()
        for e in g.in_edges[v]:
            u = g.tails[e]
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def active_edges(g: Dag, s: int, t: int) -> Set[int]:
    """Edges lying on at least one s→t path.

    An edge ``(u, v)`` is active iff ``s`` reaches ``u`` and ``v`` reaches ``t``.
    Returns an empty set when ``t`` is unreachable.
    """
    _check_endpoints(g, s, t)
    from_s = _forward_reach(g, s)
    to_t = _backward_reach(g, t)
    if t not in from_s:
        return set()
    return {e for e in range(g.edge_count) if g.tails[e] in from_s and g.heads[e] in to_t}


def count_paths(g: Dag, s: int, t: int) -> int:
    """Exact number of s→t paths (Python ints, no overflow)."""
    _check_endpoints(g, s, t)
    ways = [0] * g.node_count
    ways[s] = 1
    for v in g.topo_order:
        if ways[v] == 0:
            continue
        for e in g.out_edges[v]:
            ways[g.heads[e]] += ways[v]
    return ways[t]


def shortest_path(g: Dag, s: int, t: int, weights: Sequence[float]) -> Tuple[Path, float]:
    """Minimum-weight s→t path by dynamic programming over topological order.

    At every node the predecessor edge with the smallest tentative distance
    wins; exact ties go to the lowest edge id.

    Raises:
        Unreachable: If no s→t path exists
    """
    _check_endpoints(g, s, t)
    w = np.asarray(weights, dtype=float)
    if w.shape != (g.edge_count,):
        raise ValueError(f"Expected {g.edge_count} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("Edge weights must be finite")

    dist = [np.inf] * g.node_count
    pred: List[Optional[int]] = [None] * g.node_count
    dist[s] = 0.0
    for v in g.topo_order:
        if v == s:
            continue
        best = np.inf
        best_edge = None
        for e in g.in_edges[v]:
            d_tail = dist[g.tails[e]]
            if d_tail == np.inf:
                continue
            cand = d_tail + w[e]
            if cand < best:
                best = cand
                best_edge = e
        dist[v] = best
        pred[v] = best_edge

    if dist[t] == np.inf:
        raise Unreachable(f"Node {t} is not reachable from {s}")

    edges: List[int] = []
    v = t
    while v != s:
        e = pred[v]
        edges.append(e)
        v = g.tails[e]
    edges.reverse()
    return Path(tuple(edges)), float(sum(w[e] for e in edges))


def enumerate_paths(g: Dag, s: int, t: int, cap: int) -> List[Path]:
    """All s→t paths in lexicographic order of their edge-id sequences.

    The path count is checked up front with ``count_paths`` so oversized
    requests fail immediately.

    Raises:
        CapExceeded: If the number of paths exceeds ``cap``
    """
    total = count_paths(g, s, t)
    if total > cap:
        raise CapExceeded(f"{total} paths from {s} to {t} exceed cap {cap}")

    active = active_edges(g, s, t)
    paths: List[Path] = []
    # Each frame: (node, index into its sorted active out-edges)
    adjacency = [[e for e in g.out_edges[v] if e in active] for v in range(g.node_count)]
    prefix: List[int] = []
    stack = [(s, 0)]
    while stack:
        v, i = stack.pop()
        if v == t:
            paths.append(Path(tuple(prefix)))
            if prefix:
                prefix.pop()
            continue
        if i < len(adjacency[v]):
            e = adjacency[v][i]
            stack.append((v, i + 1))
            prefix.append(e)
            stack.append((g.heads[e], 0))
        elif prefix:
            prefix.pop()
    return paths


def _dfs_positive(g: Dag, start: int, goal: int, positive: Sequence[bool]) -> Optional[List[int]]:
    """Edges of a start→goal walk over positive edges, lowest edge id first."""
    if start == goal:
        return []
    dead: Set[int] = set()
    prefix: List[int] = []
    stack = [(start, 0)]
    while stack:
        v, i = stack[-1]
        adj = g.out_edges[v]
        while i < len(adj) and (not positive[adj[i]] or g.heads[adj[i]] in dead):
            i += 1
        if i == len(adj):
            dead.add(v)
            stack.pop()
            if prefix:
                prefix.pop()
            continue
        e = adj[i]
        stack[-1] = (v, i + 1)
        prefix.append(e)
        w = g.heads[e]
        if w == goal:
            return prefix
        stack.append((w, 0))
    return None


def find_positive_path(g: Dag, s: int, t: int, x: Sequence[float], required_edge: int) -> Path:
    """Simple s→t path through ``required_edge`` using only edges with ``x_e > EPS_FLOW``.

    Searches s→tail and head→t separately over the positive-support subgraph.
    In a DAG the concatenation is automatically simple.

    Raises:
        NoPositivePath: If either half cannot be completed, which means ``x``
            does not conserve flow
    """
    positive = [float(v) > EPS_FLOW for v in x]
    if not positive[required_edge]:
        raise NoPositivePath(f"Required edge {required_edge} carries no flow (x={x[required_edge]!r})")

    tail, head = g.tails[required_edge], g.heads[required_edge]
    before = _dfs_positive(g, s, tail, positive)
    after = _dfs_positive(g, head, t, positive) if before is not None else None
    if before is None or after is None:
        raise NoPositivePath(
            f"No positive-support {s}->{t} path through edge {required_edge}; flow conservation is violated"
        )
    return Path(tuple(before + [required_edge] + after))


def random_path_through(g: Dag, active: Set[int], edge: int, rng: np.random.Generator,
                        s: int, t: int) -> Path:
    """Uniformly-stepped random s→t path through an active ``edge``.

    Walks backwards from the edge's tail and forwards from its head choosing
    uniformly among active neighbours; every active node lies on an s→t path
    so the walk always completes.
    """
    back: List[int] = []
    v = g.tails[edge]
    while v != s:
        choices = [e for e in g.in_edges[v] if e in active]
        e = choices[int(rng.integers(len(choices)))]
        back.append(e)
        v = g.tails[e]
    back.reverse()

    forward: List[int] = []
    v = g.heads[edge]
    while v != t:
        choices = [e for e in g.out_edges[v] if e in active]
        e = choices[int(rng.integers(len(choices)))]
        forward.append(e)
        v = g.heads[e]
    return Path(tuple(back + [edge] + forward))


def is_simple_path(g: Dag, path: Path, s: int, t: int) -> bool:
    """True if ``path`` is a directed s→t walk with no repeated node."""
    if len(path) == 0:
        return False
    v = s
    seen = {s}
    for e in path:
        if not 0 <= e < g.edge_count or g.tails[e] != v:
            return False
        v = g.heads[e]
        if v in seen:
            return False
        seen.add(v)
    return v == t


def path_nodes(g: Dag, path: Path) -> List[int]:
    """Node sequence visited by ``path``."""
    if len(path) == 0:
        return []
    return [g.tails[path.edge_ids[0]]] + [g.heads[e] for e in path]
