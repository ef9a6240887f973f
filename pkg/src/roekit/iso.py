"""Spatially implemented isomorphisms and their support geometry.

An isomorphism here is conjugation by an explicit unitary u between the
ℓ₂ spaces of two equal-size finite spaces: a ↦ u a u*. From it the
pipeline reads off candidate images of each point: the support set of x
at threshold eps collects the target points whose column of u a u*
(for a the rank-one projection at x) has norm above eps, and the support
family fattens those sets by an m-ball. The residual estimate measured by
:func:`goal_estimate` is the uniform norm defect of those families over a
sampled collection of finite sets; driving it below 1 is what feeds the
matching stage.

Computational notes. For a projection χ_A the conjugate u χ_A u* has the
same singular values as the column slice u χ_A (right multiplication by a
unitary), so residual norms reduce to spectral norms of submatrices of u;
column norms of conjugated diagonals reduce likewise. Both reductions use
unitarity of u, which construction guarantees to 1e-10 in operator norm.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    NoFeasibleEps,
    NonUnitPhase,
    NotBijective,
    NotUnitary,
    SpaceMismatch,
    UnknownPoint,
)
from .functions import flattened_indicator
from .operator import LinearOperator
from .space import CoarseMap, FiniteMetricSpace, PointId

UNITARY_TOL = 1e-10


def _unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    eye = np.eye(n)
    return max(
        _kernels.spectral_norm(u.conj().T @ u - eye),
        _kernels.spectral_norm(u @ u.conj().T - eye),
    )


@dataclass(frozen=True)
class SpatialIsomorphism:
    """Conjugation a ↦ u a u* by a unitary u: ℓ₂(source) → ℓ₂(target)."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    u: np.ndarray
    u_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.u, dtype=np.complex128)
        if len(self.source) != len(self.target):
            raise SpaceMismatch(
                f"spatial isomorphism needs equal sizes, got "
                f"{len(self.source)} and {len(self.target)}"
            )
        if m.shape != (len(self.target), len(self.source)):
            raise SpaceMismatch(f"unitary shape {m.shape} does not match spaces")
        defect = _unitarity_defect(m)
        if defect > UNITARY_TOL:
            raise NotUnitary(defect)
        m.setflags(write=False)
        object.__setattr__(self, "u", m)
        inv = np.ascontiguousarray(m.conj().T)
        inv.setflags(write=False)
        object.__setattr__(self, "u_inv", inv)

    def matrix_for(self, direction: str) -> np.ndarray:
        return self.u if direction == "forward" else self.u_inv

    def spaces_for(self, direction: str) -> tuple[FiniteMetricSpace, FiniteMetricSpace]:
        if direction == "forward":
            return self.source, self.target
        return self.target, self.source

    def inverted(self) -> "SpatialIsomorphism":
        return SpatialIsomorphism(self.target, self.source, self.u_inv)


def from_bijection(
    f: CoarseMap,
    phases: dict[PointId, complex] | None = None,
) -> SpatialIsomorphism:
    """The isomorphism permuting basis vectors along a bijection.

    Entry (f(x), x) of u is the phase at x (default 1); conjugation then
    sends the projection at x exactly to the projection at f(x), phases
    cancelling.
    """
    seen: dict[PointId, PointId] = {}
    for p in f.domain.points:
        q = f.table[p]
        if q in seen:
            raise NotBijective(collision=(seen[q], p))
        seen[q] = p
    missed = [q for q in f.codomain.points if q not in seen]
    if missed:
        raise NotBijective(missed=missed[0])
    n = len(f.domain)
    u = np.zeros((n, n), dtype=np.complex128)
    for p in f.domain.points:
        lam = 1.0 + 0.0j
        if phases is not None and p in phases:
            lam = complex(phases[p])
            if abs(abs(lam) - 1.0) > 1e-12:
                raise NonUnitPhase(p, lam)
        u[f.codomain.index(f.table[p]), f.domain.index(p)] = lam
    return SpatialIsomorphism(f.domain, f.codomain, u)


def random_local_unitary(space: FiniteMetricSpace, radius: float, seed: int) -> LinearOperator:
    """Block-diagonal Haar unitary over a greedy partition into small cells.

    Points are scanned in space order; each cell absorbs later points that
    keep its diameter at most ``radius``. Each cell gets an independent
    Haar-random block (QR of a complex Gaussian with the R-diagonal phases
    absorbed), so the result is unitary with propagation at most ``radius``
    and is reproducible from the seed.
    """
    if radius < 0:
        raise SpaceMismatch("radius must be >= 0")
    rng = np.random.default_rng(seed)
    n = len(space)
    unassigned = list(range(n))
    cells: list[list[int]] = []
    while unassigned:
        head = unassigned.pop(0)
        cell = [head]
        rest = []
        for j in unassigned:
            if all(space.dist[j, c] <= radius for c in cell):
                cell.append(j)
            else:
                rest.append(j)
        unassigned = rest
        cells.append(cell)
    u = np.zeros((n, n), dtype=np.complex128)
    for cell in cells:
        k = len(cell)
        z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        phase = np.where(np.abs(d) > 0, d / np.abs(np.where(d == 0, 1, d)), 1.0)
        q = q * phase[None, :]
        u[np.ix_(cell, cell)] = q
    return LinearOperator(space, space, u)


def perturb(iso: SpatialIsomorphism, w: LinearOperator) -> SpatialIsomorphism:
    """Compose with a unitary on the source: conjugation by u w."""
    if w.domain != iso.source or w.codomain != iso.source:
        raise SpaceMismatch("perturbation must act on the source space")
    defect = _unitarity_defect(np.ascontiguousarray(w.entries))
    if defect > UNITARY_TOL:
        raise NotUnitary(defect)
    return SpatialIsomorphism(iso.source, iso.target, iso.u @ w.entries)


def apply(iso: SpatialIsomorphism, a: LinearOperator) -> LinearOperator:
    """Image u a u* of an operator on the source space."""
    if a.domain != iso.source or a.codomain != iso.source:
        raise SpaceMismatch("operator does not live on the source space")
    return LinearOperator(iso.target, iso.target,
                          iso.u @ a.entries @ iso.u_inv)


def apply_inverse(iso: SpatialIsomorphism, a: LinearOperator) -> LinearOperator:
    """Preimage u* a u of an operator on the target space."""
    if a.domain != iso.target or a.codomain != iso.target:
        raise SpaceMismatch("operator does not live on the target space")
    return LinearOperator(iso.source, iso.source,
                          iso.u_inv @ a.entries @ iso.u)


def _point_column_norms(matrix: np.ndarray) -> np.ndarray:
    """norms[z, x] = column-z norm of the conjugated projection at x.

    The conjugate of the projection at x is the rank-one matrix v v* with
    v = matrix[:, x]; its column z has norm |v[z]| * ||v||, exactly.
    """
    col_norms = np.linalg.norm(matrix, axis=0)
    return np.abs(matrix) * col_norms[None, :]


def support_set(iso: SpatialIsomorphism, x: PointId, eps: float,
                direction: str = "forward") -> set[PointId]:
    """Target points whose column of the conjugated projection exceeds eps."""
    if eps <= 0:
        raise SpaceMismatch("eps must be > 0")
    src, tgt = iso.spaces_for(direction)
    xi = src.index(x)
    m = iso.matrix_for(direction)
    v = m[:, xi]
    norms = np.abs(v) * np.linalg.norm(v)
    return {tgt.points[z] for z in np.flatnonzero(norms > eps)}


@dataclass(frozen=True)
class SupportFamily:
    """Candidate-image sets per source point, with construction parameters.

    Empty sets are kept and reported, never hidden: they make the matching
    stage fail with an honest witness.
    """

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    sets: dict[PointId, tuple[PointId, ...]]
    params: dict

    def union(self, points: Iterable[PointId]) -> set[PointId]:
        out: set[PointId] = set()
        for p in points:
            out.update(self.sets[p])
        return out

    def empty_points(self) -> list[PointId]:
        return [p for p in self.source.points if not self.sets[p]]

    def max_diameter(self) -> float:
        worst = 0.0
        for p in self.source.points:
            members = self.sets[p]
            if len(members) >= 2:
                idx = self.target.indices(members)
                worst = max(worst, float(self.target.dist[np.ix_(idx, idx)].max()))
        return worst


def _fatten(space: FiniteMetricSpace, member_mask: np.ndarray, m: float) -> np.ndarray:
    if m <= 0 or not member_mask.any():
        return member_mask
    idx = np.flatnonzero(member_mask)
    return space.dist[:, idx].min(axis=1) <= m


def support_family(iso: SpatialIsomorphism, eps: float, m: float,
                   direction: str = "forward") -> SupportFamily:
    """For each source point, the m-ball around its eps-support set."""
    if eps <= 0:
        raise SpaceMismatch("eps must be > 0")
    if m < 0:
        raise SpaceMismatch("m must be >= 0")
    src, tgt = iso.spaces_for(direction)
    norms = _point_column_norms(iso.matrix_for(direction))
    sets = {}
    for xi, p in enumerate(src.points):
        members = norms[:, xi] > eps
        members = _fatten(tgt, members, m)
        sets[p] = tuple(tgt.points[z] for z in np.flatnonzero(members))
    return SupportFamily(src, tgt, sets, {"eps": eps, "m": m, "direction": direction})


def support_family_flattened(iso: SpatialIsomorphism, r: float,
                             threshold: float = 0.5,
                             direction: str = "forward") -> SupportFamily:
    """Support sets read from conjugated per-point flattened indicators.

    The column-y norm of the conjugate of a diagonal g is
    sqrt(sum_j g(j)^2 |u[y, j]|^2) by unitarity, so all the sets come out
    of one matrix product.
    """
    if r <= 0:
        raise SpaceMismatch("r must be > 0")
    src, tgt = iso.spaces_for(direction)
    m = iso.matrix_for(direction)
    bumps = np.empty((len(src), len(src)))
    for xi, p in enumerate(src.points):
        bumps[:, xi] = flattened_indicator(src, [p], r).values
    col_norms_sq = (np.abs(m) ** 2) @ (bumps ** 2)
    sets = {}
    for xi, p in enumerate(src.points):
        members = np.sqrt(col_norms_sq[:, xi]) > threshold
        sets[p] = tuple(tgt.points[z] for z in np.flatnonzero(members))
    return SupportFamily(src, tgt, sets,
                         {"r": r, "threshold": threshold, "direction": direction})


def epsilon_for_delta(
    iso: SpatialIsomorphism,
    delta: float,
    eps_grid: Sequence[float],
) -> tuple[float, list[dict]]:
    """Largest grid threshold whose off-support residual stays below delta.

    For each grid eps the residual at a point is the norm of the
    conjugated projection masked to the complement of its support set (a
    rank-one norm, computed exactly); the table of per-eps maxima over
    both directions is returned alongside the chosen eps. Raises
    :class:`NoFeasibleEps` with the best row when nothing qualifies.
    """
    if delta <= 0:
        raise SpaceMismatch("delta must be > 0")
    if not eps_grid:
        raise SpaceMismatch("eps grid must be nonempty")
    grid = sorted(set(float(e) for e in eps_grid), reverse=True)
    table = []
    feasible = None
    for eps in grid:
        worst = {"forward": 0.0, "backward": 0.0}
        for direction in ("forward", "backward"):
            matrix = iso.matrix_for(direction)
            norms = _point_column_norms(matrix)
            col_full = np.linalg.norm(matrix, axis=0)
            outside = norms <= eps
            masked = np.where(outside, np.abs(matrix), 0.0)
            residuals = np.linalg.norm(masked, axis=0) * col_full
            worst[direction] = float(residuals.max(initial=0.0))
        row = {"eps": eps, "max_forward": worst["forward"],
               "max_backward": worst["backward"]}
        table.append(row)
        if feasible is None and max(worst.values()) < delta:
            feasible = eps
    if feasible is None:
        best = min(table, key=lambda r: max(r["max_forward"], r["max_backward"]))
        raise NoFeasibleEps(best["eps"],
                            max(best["max_forward"], best["max_backward"]), table)
    return feasible, table


@dataclass(frozen=True)
class SetSampler:
    """Deterministic source of finite subsets for the residual estimate.

    Exhaustive (all nonempty subsets) up to ``exhaustive_limit`` points;
    beyond that: all singletons, all balls at the given radii, and
    ``random_count`` seeded random subsets. The reported maximum is then a
    lower bound for the true supremum over all finite sets, with the
    ball-shaped sets targeting the hard cases.
    """

    space: FiniteMetricSpace
    seed: int = 0
    radii: tuple[float, ...] = (1.0, 2.0, 3.0, 5.0, 8.0)
    random_count: int = 200
    exhaustive_limit: int = 12

    def sample(self) -> list[tuple[PointId, ...]]:
        n = len(self.space)
        if n == 0:
            return []
        if n <= self.exhaustive_limit:
            out = []
            for mask in range(1, 1 << n):
                out.append(tuple(self.space.points[i]
                                 for i in range(n) if mask >> i & 1))
            return out
        sets: dict[tuple[PointId, ...], None] = {}
        for p in self.space.points:
            sets.setdefault((p,), None)
        for r in self.radii:
            if r > self.space.diameter:
                continue
            for i in range(n):
                members = np.flatnonzero(self.space.dist[:, i] <= r)
                sets.setdefault(tuple(self.space.points[j] for j in members), None)
        rng = np.random.default_rng(self.seed)
        for _ in range(self.random_count):
            size = int(rng.integers(1, n + 1))
            idx = np.sort(rng.choice(n, size=size, replace=False))
            sets.setdefault(tuple(self.space.points[j] for j in idx), None)
        return list(sets)


def _thread_count() -> int:
    raw = os.environ.get("ROE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _direction_residuals(
    iso: SpatialIsomorphism,
    eps: float,
    m: float,
    direction: str,
    subsets: list[tuple[PointId, ...]],
) -> list[float]:
    src, tgt = iso.spaces_for(direction)
    matrix = iso.matrix_for(direction)
    norms = _point_column_norms(matrix)
    support_mask = norms > eps  # [target, source]
    src_index = {p: i for i, p in enumerate(src.points)}

    def residual(subset: tuple[PointId, ...]) -> float:
        cols = [src_index[p] for p in subset]
        members = support_mask[:, cols].any(axis=1)
        members = _fatten(tgt, members, m)
        rows = np.flatnonzero(~members)
        # ||(1 - χ_B) u χ_A u*|| = ||(1 - χ_B) u χ_A||: right unitary factor
        # preserves singular values.
        return _kernels.masked_spectral_norm(matrix, rows, cols)

    workers = _thread_count()
    if workers > 1 and len(subsets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(residual, subsets))
    return [residual(s) for s in subsets]


def goal_estimate(
    iso: SpatialIsomorphism,
    eps: float,
    m: float,
    samplers: tuple[SetSampler, SetSampler] | None = None,
    seed: int = 0,
) -> tuple[float, dict]:
    """Maximum off-support residual over sampled finite sets, both directions.

    Returns the maximum and the witness attaining it. Results are
    independent of evaluation order and deterministic given the seed; the
    first maximizer in sampling order wins ties.
    """
    if samplers is None:
        samplers = (SetSampler(iso.source, seed=seed),
                    SetSampler(iso.target, seed=seed))
    worst = 0.0
    witness = {"side": "source", "set": (), "residual": 0.0}
    for sampler, direction, side in (
        (samplers[0], "forward", "source"),
        (samplers[1], "backward", "target"),
    ):
        subsets = sampler.sample()
        for subset, value in zip(
            subsets, _direction_residuals(iso, eps, m, direction, subsets)
        ):
            if value > worst:
                worst = value
                witness = {"side": side, "set": subset, "residual": value}
    return worst, witness
