"""Space and bijection generators for experiments.

All generators are deterministic given their seed and produce integer
point ids 0..n-1. Graph kinds realize the usual test geometries: paths,
cycles, square grids, complete trees, random geometric graphs, and random
regular graphs as expander stand-ins.
"""

from __future__ import annotations

import numpy as np

from .errors import DisconnectedGraph, InvalidParams
from .space import CoarseMap, FiniteMetricSpace, from_graph

Edge = tuple[int, int]


def path_space(n: int) -> tuple[FiniteMetricSpace, list[Edge]]:
    if n < 1:
        raise InvalidParams("path needs >= 1 point")
    edges = [(i, i + 1) for i in range(n - 1)]
    return _space_from_edges(n, edges, f"path-{n}"), edges


def cycle_space(n: int) -> tuple[FiniteMetricSpace, list[Edge]]:
    if n < 3:
        raise InvalidParams("cycle needs >= 3 points")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return _space_from_edges(n, edges, f"cycle-{n}"), edges


def grid_space(rows: int, cols: int) -> tuple[FiniteMetricSpace, list[Edge]]:
    if rows < 1 or cols < 1:
        raise InvalidParams("grid needs positive dimensions")
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    return _space_from_edges(rows * cols, edges, f"grid-{rows}x{cols}"), edges


def tree_space(arity: int, depth: int) -> tuple[FiniteMetricSpace, list[Edge]]:
    if arity < 1 or depth < 0:
        raise InvalidParams("tree needs arity >= 1 and depth >= 0")
    edges = []
    nodes = [0]
    next_id = 1
    frontier = [0]
    for _ in range(depth):
        new_frontier = []
        for parent in frontier:
            for _ in range(arity):
                edges.append((parent, next_id))
                nodes.append(next_id)
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return _space_from_edges(len(nodes), edges, f"tree-{arity}x{depth}"), edges


def random_geometric_space(
    n: int, threshold: float, seed: int
) -> tuple[FiniteMetricSpace, list[Edge]]:
    """Graph on uniform points in the unit square, edges below the threshold."""
    if n < 1 or threshold <= 0:
        raise InvalidParams("random-geometric needs n >= 1 and threshold > 0")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if float(np.hypot(*(pts[i] - pts[j]))) <= threshold:
                edges.append((i, j))
    return _space_from_edges(n, edges, f"rgg-{n}-{threshold:g}-{seed}"), edges


def regular_graph_space(n: int, degree: int, seed: int) -> tuple[FiniteMetricSpace, list[Edge]]:
    """Seeded random d-regular graph via the pairing model, retried until
    simple and connected (an expander with high probability)."""
    if degree < 1 or degree >= n or (n * degree) % 2 != 0:
        raise InvalidParams("regular graph needs 1 <= d < n with n*d even")
    rng = np.random.default_rng(seed)
    for _ in range(200):
        edges = _try_pairing(n, degree, rng)
        if edges is None:
            continue
        try:
            return _space_from_edges(n, edges, f"regular-{n}-{degree}-{seed}"), edges
        except DisconnectedGraph:
            continue
    raise InvalidParams(f"could not sample a connected {degree}-regular graph on {n} points")


def _try_pairing(n: int, degree: int, rng) -> list[Edge] | None:
    stubs = np.repeat(np.arange(n), degree)
    rng.shuffle(stubs)
    seen: set[Edge] = set()
    for a, b in zip(stubs[0::2], stubs[1::2]):
        a, b = int(a), int(b)
        if a == b:
            return None
        key = (min(a, b), max(a, b))
        if key in seen:
            return None
        seen.add(key)
    return sorted(seen)


def _space_from_edges(n: int, edges: list[Edge], label: str) -> FiniteMetricSpace:
    adjacency: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        adjacency[a].append(b)
    return from_graph(adjacency, label)


def random_bce(space: FiniteMetricSpace, displacement: float, seed: int,
               attempts_factor: int = 4) -> CoarseMap:
    """Random bijection moving no point farther than ``displacement``.

    Built from the identity by seeded transpositions; a swap of the images
    of two points is accepted only when both displacements stay within the
    bound, which certifies the bound for the final map by induction. The
    result is automatically a bijective coarse equivalence: closeness to
    the identity is at most the bound.
    """
    if displacement < 0:
        raise InvalidParams("displacement bound must be >= 0")
    rng = np.random.default_rng(seed)
    n = len(space)
    image = list(range(n))
    for _ in range(attempts_factor * n):
        i, j = int(rng.integers(n)), int(rng.integers(n))
        if i == j:
            continue
        if (space.dist[i, image[j]] <= displacement
                and space.dist[j, image[i]] <= displacement):
            image[i], image[j] = image[j], image[i]
    table = {space.points[i]: space.points[image[i]] for i in range(n)}
    return CoarseMap(space, space, table)


def random_phases(space: FiniteMetricSpace, seed: int) -> dict:
    """Seeded unit-modulus phase per point."""
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=len(space))
    return {p: complex(np.cos(t), np.sin(t))
            for p, t in zip(space.points, angles)}
