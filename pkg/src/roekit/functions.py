"""Diagonal function algebra: flattened indicators and oscillation moduli.

A flattened indicator is 1 on a set, decays linearly with distance, and
vanishes beyond a cutoff radius. Sums of such bumps over well-separated
families are the slowly-oscillating test functions of the pipeline; their
oscillation outside a finite excluded set is measured by ``so_variation``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import EmptySet, NonpositiveRadius, OverlappingSupports
from .space import FiniteMetricSpace, PointId, ball


@dataclass(frozen=True)
class DiagonalFunction:
    """A [0, 1]-valued function on the points of a space."""

    space: FiniteMetricSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (len(self.space),):
            raise EmptySet(f"value vector length {v.shape} for {len(self.space)} points")
        if not np.isfinite(v).all():
            raise NonpositiveRadius("non-finite function value")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, point: PointId) -> float:
        return float(self.values[self.space.index(point)])

    def as_dict(self) -> dict[PointId, float]:
        return {p: float(v) for p, v in zip(self.space.points, self.values)}


def flattened_indicator(
    space: FiniteMetricSpace,
    subset: Iterable[PointId],
    r: float,
) -> DiagonalFunction:
    """Bump equal to 1 on the set, max(0, 1 - d(x, set)/r) elsewhere."""
    idx = space.indices(subset)
    if not idx:
        raise EmptySet("flattened indicator needs a nonempty set")
    if r <= 0:
        raise NonpositiveRadius(f"radius must be positive, got {r}")
    d_to_set = space.dist[:, idx].min(axis=1)
    return DiagonalFunction(space, np.maximum(0.0, 1.0 - d_to_set / r))


def so_variation(fn: DiagonalFunction, r: float, excluded: Iterable[PointId] = ()) -> float:
    """Largest |fn(x) - fn(x')| over pairs outside ``excluded`` within distance r.

    Returns 0 when fewer than two points survive the exclusion.
    """
    space = fn.space
    keep = np.ones(len(space), dtype=bool)
    for p in excluded:
        keep[space.index(p)] = False
    if keep.sum() < 2:
        return 0.0
    vals = fn.values[keep]
    dist = space.dist[np.ix_(keep, keep)]
    near = dist <= r
    diff = np.abs(vals[:, None] - vals[None, :])
    return float(diff[near].max(initial=0.0))


def separated_family(
    space: FiniteMetricSpace,
    count: int,
    base_gap: float = 1.0,
    first_index: int = 0,
) -> tuple[list[set[PointId]], bool]:
    """Greedy family of singletons with pairwise gaps >= 2(n+m)*base_gap.

    The n-th and m-th sets (indices starting at ``first_index``) are kept
    at distance at least ``2*(n+m)*base_gap``. A finite window may not
    host the full family, so the construction returns as many sets as fit
    plus an exhaustion flag instead of failing. Greedy and deterministic:
    points are scanned in space order.
    """
    if count < 1:
        raise EmptySet("count must be >= 1")
    chosen: list[set[PointId]] = []
    chosen_idx: list[int] = []
    for k in range(count):
        n_k = first_index + k
        found = None
        for i in range(len(space)):
            ok = True
            for prev, j in enumerate(chosen_idx):
                n_prev = first_index + prev
                if space.dist[i, j] < 2.0 * (n_k + n_prev) * base_gap:
                    ok = False
                    break
            if ok:
                found = i
                break
        if found is None:
            return chosen, True
        chosen_idx.append(found)
        chosen.append({space.points[found]})
    return chosen, False


def sum_flattened(
    space: FiniteMetricSpace,
    family: Sequence[Iterable[PointId]],
    radii: Sequence[float],
) -> DiagonalFunction:
    """Pointwise sum of flattened indicators with pairwise disjoint supports.

    The support of the n-th bump is the closed radius-r_n ball around its
    set; overlap of any two supports raises :class:`OverlappingSupports`
    with a witness point, since the sum would then leave [0, 1].
    """
    if len(family) != len(radii):
        raise EmptySet("family and radii lengths differ")
    supports = [ball(space, subset, r) for subset, r in zip(family, radii)]
    for i in range(len(supports)):
        for j in range(i + 1, len(supports)):
            overlap = supports[i] & supports[j]
            if overlap:
                raise OverlappingSupports(sorted(overlap, key=str)[0], (i, j))
    total = np.zeros(len(space))
    for subset, r in zip(family, radii):
        total = total + flattened_indicator(space, subset, r).values
    return DiagonalFunction(space, total)
