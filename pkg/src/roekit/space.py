"""Finite metric spaces, balls, growth, and coarse maps.

A :class:`FiniteMetricSpace` is a finite point set with a full distance
table; it is the truncation-to-a-window of an unbounded uniformly locally
finite space. All supremum-style quantities (growth, expansion, closeness)
are exact maxima computed by full enumeration, which is the point of the
truncation: the O(n^2) pair scans are acceptable for n up to a couple of
thousand points.

Distances are stored as float64 even for graph metrics, so one code path
serves both metric sources; graph-derived values are small integers and
therefore exact.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    DisconnectedGraph,
    DomainMismatch,
    FormatError,
    MetricViolation,
    UnknownPoint,
)

PointId = int | str

#: Comparison slack for distance tables that did not come from a graph.
DIST_TOL = 1e-12


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite point set with a validated distance table.

    ``points`` fixes the point order used by every matrix in the toolkit;
    ``dist`` is indexed positionally. Instances are immutable: the distance
    array is marked read-only, so sharing across threads is safe.
    """

    points: tuple[PointId, ...]
    dist: np.ndarray
    label: str = ""
    _index: dict[PointId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {p: i for i, p in enumerate(self.points)}
        if len(index) != len(self.points):
            raise MetricViolation("shape", None, ": duplicate point ids")
        object.__setattr__(self, "points", tuple(self.points))
        d = np.ascontiguousarray(self.dist, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.points)

    def index(self, point: PointId) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise UnknownPoint(point, self.label) from None

    def indices(self, points: Iterable[PointId]) -> list[int]:
        return [self.index(p) for p in points]

    def contains(self, point: PointId) -> bool:
        return point in self._index

    def d(self, x: PointId, y: PointId) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def distance_values(self) -> list[float]:
        """Sorted distinct distances attained by the space (including 0)."""
        return sorted({float(v) for v in np.unique(self.dist)})


def build_space(
    points: Sequence[PointId],
    dist_table: Sequence[Sequence[float]] | np.ndarray,
    label: str = "",
) -> FiniteMetricSpace:
    """Validate a distance table and wrap it as a space.

    Checks, in order: square shape, exact zero diagonal, symmetry and
    strict positivity off the diagonal, and the triangle inequality
    (with slack ``DIST_TOL`` to absorb float round-off). The triangle
    scan is O(n^3), vectorized over one index.
    """
    d = np.asarray(dist_table, dtype=np.float64)
    n = len(points)
    if d.shape != (n, n):
        raise MetricViolation("shape", None, f": table shape {d.shape} for {n} points")
    if not np.isfinite(d).all():
        raise MetricViolation("shape", None, ": non-finite distance")
    diag_bad = np.flatnonzero(np.diag(d) != 0.0)
    if diag_bad.size:
        i = int(diag_bad[0])
        raise MetricViolation("diagonal", (points[i],))
    asym = np.abs(d - d.T)
    if asym.max(initial=0.0) > DIST_TOL:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise MetricViolation("symmetry", (points[i], points[j]))
    d = (d + d.T) / 2.0  # make symmetry exact downstream
    off = d + np.diag(np.full(n, np.inf))
    if off.min(initial=np.inf) <= 0.0:
        i, j = np.unravel_index(int(np.argmin(off)), off.shape)
        raise MetricViolation("positivity", (points[i], points[j]))
    for k in range(n):
        slack = d - (d[:, [k]] + d[[k], :])
        if slack.max(initial=0.0) > DIST_TOL:
            i, j = np.unravel_index(int(np.argmax(slack)), slack.shape)
            raise MetricViolation("triangle", (points[i], points[k], points[j]))
    return FiniteMetricSpace(tuple(points), d, label)


def from_graph(
    adjacency: Mapping[PointId, Iterable[PointId]],
    label: str = "",
) -> FiniteMetricSpace:
    """Space of an undirected connected graph under the hop-count metric.

    ``adjacency`` maps each vertex to its neighbours; edges may be listed
    in one or both directions. Distances are all-pairs BFS lengths.
    Raises :class:`DisconnectedGraph` with one component as witness.
    """
    points = tuple(adjacency.keys())
    index = {p: i for i, p in enumerate(points)}
    rows, cols = [], []
    for p, nbrs in adjacency.items():
        for q in nbrs:
            if q not in index:
                raise UnknownPoint(q, label)
            if p == q:
                continue
            rows.append(index[p])
            cols.append(index[q])
            rows.append(index[q])
            cols.append(index[p])
    n = len(points)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(graph, method="D", unweighted=True, directed=False)
    if np.isinf(d).any():
        reachable = np.isfinite(d[0])
        component = [points[i] for i in np.flatnonzero(reachable)]
        raise DisconnectedGraph(component)
    # BFS metrics satisfy the axioms by construction; skip the O(n^3) scan.
    return FiniteMetricSpace(points, d, label)


def ball(space: FiniteMetricSpace, center_set: Iterable[PointId], r: float) -> set[PointId]:
    """Closed ball of radius ``r`` around a point set.

    Returns ``{y : d(y, center_set) <= r}``; with ``r = 0`` this is the
    center set itself.
    """
    idx = space.indices(center_set)
    if not idx:
        return set()
    if r < 0:
        raise MetricViolation("shape", None, f": negative radius {r}")
    near = space.dist[:, idx].min(axis=1) <= r
    return {space.points[i] for i in np.flatnonzero(near)}


def growth(space: FiniteMetricSpace, r: float) -> int:
    """Largest cardinality of a radius-``r`` ball, the truncated growth value."""
    if len(space) == 0:
        return 0
    return int((space.dist <= r).sum(axis=1).max())


@dataclass(frozen=True)
class ExpansionProfile:
    """Sampled modulus of a coarse map: input radius -> least output radius.

    ``samples`` maps r to s = max{ d(f(x), f(x')) : d(x, x') <= r }. The
    table is monotone in r by construction and validated on creation.
    """

    samples: dict[float, float]

    def __post_init__(self):
        last = -np.inf
        for r in sorted(self.samples):
            s = self.samples[r]
            if s < last - DIST_TOL:
                raise DomainMismatch(f"expansion profile not monotone at r={r}")
            last = max(last, s)

    def as_sorted_items(self) -> list[tuple[float, float]]:
        return sorted(self.samples.items())


@dataclass(frozen=True)
class CoarseMap:
    """A total function between two spaces, stored as an explicit table."""

    domain: FiniteMetricSpace
    codomain: FiniteMetricSpace
    table: dict[PointId, PointId]

    def __post_init__(self):
        missing = [p for p in self.domain.points if p not in self.table]
        if missing:
            raise DomainMismatch(f"map undefined at {missing[0]!r}")
        for p, q in self.table.items():
            if not self.domain.contains(p):
                raise UnknownPoint(p, self.domain.label)
            if not self.codomain.contains(q):
                raise UnknownPoint(q, self.codomain.label)
        object.__setattr__(self, "table", dict(self.table))

    def __call__(self, point: PointId) -> PointId:
        return self.table[point]

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def is_bijective(self) -> bool:
        return self.is_injective() and len(self.table) == len(self.codomain)

    def inverse(self) -> "CoarseMap":
        """Inverse table; only defined for bijections."""
        from .errors import NotBijective

        if not self.is_bijective():
            raise NotBijective(missed=next(
                (q for q in self.codomain.points if q not in set(self.table.values())),
                None,
            ))
        return CoarseMap(self.codomain, self.domain,
                         {q: p for p, q in self.table.items()})

    def compose(self, inner: "CoarseMap") -> "CoarseMap":
        """self after inner: requires inner.codomain == self.domain."""
        if inner.codomain is not self.domain and inner.codomain != self.domain:
            raise DomainMismatch("composition spaces do not match")
        return CoarseMap(inner.domain, self.codomain,
                         {p: self.table[inner.table[p]] for p in inner.domain.points})


def identity_map(space: FiniteMetricSpace) -> CoarseMap:
    return CoarseMap(space, space, {p: p for p in space.points})


def expansion_profile(cmap: CoarseMap, radii: Sequence[float]) -> ExpansionProfile:
    """Exact expansion table of a map, by enumeration over all point pairs.

    ``radii`` must be finite and ascending. For each r the returned s is
    the least bound such that d(x, x') <= r forces d(f(x), f(x')) <= s.
    """
    if list(radii) != sorted(radii):
        raise DomainMismatch("radii must be ascending")
    dom, cod = cmap.domain, cmap.codomain
    img = np.array([cod.index(cmap.table[p]) for p in dom.points])
    dimg = cod.dist[np.ix_(img, img)]
    samples = {}
    for r in radii:
        mask = dom.dist <= r
        samples[float(r)] = float(dimg[mask].max(initial=0.0))
    return ExpansionProfile(samples)


def closeness(f: CoarseMap, g: CoarseMap) -> float:
    """Exact sup-distance between two parallel maps (a pseudometric)."""
    if f.domain != g.domain or f.codomain != g.codomain:
        raise DomainMismatch("closeness needs maps with equal domain and codomain")
    cod = f.codomain
    return max(
        (cod.d(f.table[p], g.table[p]) for p in f.domain.points),
        default=0.0,
    )


def verify_mutual_inverse(
    f: CoarseMap,
    g: CoarseMap,
    radii: Sequence[float],
) -> dict:
    """Measure how far f and g are from being mutually inverse.

    Returns the closeness of f∘g to the identity on f's codomain, of g∘f
    to the identity on f's domain, and both expansion profiles. All four
    quantities are exact; the caller judges the thresholds.
    """
    if f.domain != g.codomain or f.codomain != g.domain:
        raise DomainMismatch("maps are not composable in both orders")
    return {
        "closeness_fg_id": closeness(f.compose(g), identity_map(f.codomain)),
        "closeness_gf_id": closeness(g.compose(f), identity_map(f.domain)),
        "expansion_f": expansion_profile(f, radii),
        "expansion_g": expansion_profile(g, radii),
    }


def default_radii(space: FiniteMetricSpace, limit: int = 24) -> list[float]:
    """Radii grid for profiles: the attained distances, thinned to ``limit``."""
    values = space.distance_values()
    if len(values) <= limit:
        return values
    picks = np.unique(np.linspace(0, len(values) - 1, limit).astype(int))
    return [values[i] for i in picks]


# --- on-disk format ---------------------------------------------------------

def space_to_jsonable(space: FiniteMetricSpace, with_dist: bool = True) -> dict:
    return {
        "label": space.label,
        "points": list(space.points),
        "dist": [[float(v) for v in row] for row in space.dist],
    } if with_dist else {"label": space.label, "points": list(space.points)}


def load_space(path) -> FiniteMetricSpace:
    """Read a space JSON file: either an edge list or an explicit table.

    The format is ``{"label", "points", "edges": [[id, id], ...]}`` for
    graph input or ``{"label", "points", "dist": [[row], ...]}`` for an
    explicit metric; exactly one of ``edges``/``dist`` must be present.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "points" not in doc:
        raise FormatError(f"{path}: missing 'points'")
    has_edges = "edges" in doc
    has_dist = "dist" in doc
    if has_edges == has_dist:
        raise FormatError(f"{path}: exactly one of 'edges'/'dist' must be present")
    points = doc["points"]
    label = doc.get("label", "")
    if has_dist:
        return build_space(points, doc["dist"], label)
    adjacency: dict[PointId, list[PointId]] = {p: [] for p in points}
    for edge in doc["edges"]:
        if len(edge) != 2:
            raise FormatError(f"{path}: malformed edge {edge!r}")
        a, b = edge
        if a not in adjacency or b not in adjacency:
            raise FormatError(f"{path}: edge {edge!r} uses unknown point")
        adjacency[a].append(b)
    return from_graph(adjacency, label)


def save_space(space: FiniteMetricSpace, path, edges: list[tuple[PointId, PointId]] | None = None):
    """Write a space JSON file; pass ``edges`` to store the graph form."""
    from .serialize import dumps_canonical

    if edges is not None:
        doc = {"label": space.label, "points": list(space.points),
               "edges": [[a, b] for a, b in edges]}
    else:
        doc = space_to_jsonable(space)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(doc))
