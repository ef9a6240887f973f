"""Bijection extraction: matching, chain combination, and certificates.

The pipeline turns a spatially implemented isomorphism into a bijection
between the two point sets: build candidate-image families in both
directions, find injective selections by maximum bipartite matching (the
matching condition has an explicit violator whenever it fails), merge the
two injections into a bijection by classifying alternating chains, then
re-measure everything (closeness to the raw selection, expansion profiles,
residuals) into a certificate.

Failure is a first-class outcome: a finite window of an unbounded space
can legitimately defeat the estimate near its boundary, and the error
carries a re-checkable witness instead of forcing success.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import (
    CertificateInvalid,
    ExtractionFailed,
    HallFailed,
    NotInjective,
)
from .iso import (
    SetSampler,
    SpatialIsomorphism,
    SupportFamily,
    goal_estimate,
    support_family,
    support_family_flattened,
)
from .space import (
    CoarseMap,
    ExpansionProfile,
    PointId,
    closeness,
    default_radii,
    expansion_profile,
    verify_mutual_inverse,
)

_UNREACHED = -1


@dataclass(frozen=True)
class HallWitness:
    """Outcome of the matching condition: a selection or a violator.

    Exactly one of ``matching`` (an injective source -> target map) and
    ``deficiency`` (a source set strictly larger than the union of its
    candidate sets, re-checkable by counting) is set.
    """

    matching: dict[PointId, PointId] | None
    deficiency: tuple[PointId, ...] | None
    neighborhood: tuple[PointId, ...] | None

    @property
    def matched(self) -> bool:
        return self.matching is not None


def _maximum_matching(adjacency: list[list[int]], n_right: int,
                      order: Sequence[int]) -> tuple[list[int], list[int]]:
    """Hopcroft-Karp on an indexed bipartite graph.

    ``adjacency[i]`` lists right-neighbours of left vertex i in a fixed
    order; ``order`` fixes the left scan order, making the matching
    deterministic. Returns (match_left, match_right) with -1 for exposed.
    """
    n_left = len(adjacency)
    match_l = [_UNREACHED] * n_left
    match_r = [_UNREACHED] * n_right
    INF = n_left + n_right + 1

    dist = [0] * n_left

    def bfs() -> bool:
        queue = deque()
        for i in order:
            if match_l[i] == _UNREACHED:
                dist[i] = 0
                queue.append(i)
            else:
                dist[i] = INF
        found = INF
        while queue:
            i = queue.popleft()
            if dist[i] >= found:
                continue
            for j in adjacency[i]:
                k = match_r[j]
                if k == _UNREACHED:
                    found = dist[i] + 1
                elif dist[k] == INF:
                    dist[k] = dist[i] + 1
                    queue.append(k)
        return found != INF

    def dfs(i: int) -> bool:
        for j in adjacency[i]:
            k = match_r[j]
            if k == _UNREACHED or (dist[k] == dist[i] + 1 and dfs(k)):
                match_l[i] = j
                match_r[j] = i
                return True
        dist[i] = INF
        return False

    while bfs():
        for i in order:
            if match_l[i] == _UNREACHED:
                dfs(i)
    return match_l, match_r


def hall_check(family: SupportFamily, reverse_tie_break: bool = False) -> HallWitness:
    """Maximum matching over the family; a violator when no selection exists.

    When some source point stays unmatched, the source points reachable
    from it by alternating paths form a set strictly larger than the union
    of their candidate sets; that set is returned as the deficiency
    witness. ``reverse_tie_break`` flips the deterministic scan order
    (a debugging aid: certified outcomes must not depend on it).
    """
    src_points = list(family.source.points)
    tgt_points = list(family.target.points)
    tgt_index = {p: i for i, p in enumerate(tgt_points)}
    adjacency = []
    for p in src_points:
        nbrs = sorted((tgt_index[q] for q in family.sets[p]))
        if reverse_tie_break:
            nbrs.reverse()
        adjacency.append(nbrs)
    order = list(range(len(src_points)))
    if reverse_tie_break:
        order.reverse()
    match_l, match_r = _maximum_matching(adjacency, len(tgt_points), order)

    exposed = [i for i in range(len(src_points)) if match_l[i] == _UNREACHED]
    if not exposed:
        matching = {src_points[i]: tgt_points[match_l[i]]
                    for i in range(len(src_points))}
        return HallWitness(matching=matching, deficiency=None, neighborhood=None)

    # Alternating reachability from one exposed vertex: every reachable
    # right vertex is matched (else the matching was not maximum), and its
    # partner joins the violator.
    start = exposed[0]
    reached_l = {start}
    reached_r: set[int] = set()
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in adjacency[i]:
            if j in reached_r:
                continue
            reached_r.add(j)
            k = match_r[j]
            if k != _UNREACHED and k not in reached_l:
                reached_l.add(k)
                queue.append(k)
    deficiency = tuple(src_points[i] for i in sorted(reached_l))
    neighborhood = tuple(tgt_points[j] for j in sorted(reached_r))
    return HallWitness(matching=None, deficiency=deficiency,
                       neighborhood=neighborhood)


def select_injection(family: SupportFamily, reverse_tie_break: bool = False) -> CoarseMap:
    """Injective selection from the family, or :class:`HallFailed`."""
    witness = hall_check(family, reverse_tie_break=reverse_tie_break)
    if not witness.matched:
        raise HallFailed(witness.deficiency, witness.neighborhood)
    return CoarseMap(family.source, family.target, dict(witness.matching))


def csb_combine(f: CoarseMap, g: CoarseMap) -> CoarseMap:
    """Merge injections f: X -> Y and g: Y -> X into a bijection h: X -> Y.

    Walk each point's backward chain x <- g <- f <- g <- ...; chains that
    stop at an X point outside the image of g take h = f, chains that stop
    at a Y point outside the image of f take h = g⁻¹, and cycles take
    h = f. On equal-size finite sets this always yields a bijection, and
    when f and g are mutually inverse every chain is a cycle, so h = f.
    """
    for name, cmap in (("f", f), ("g", g)):
        seen: dict[PointId, PointId] = {}
        for p in cmap.domain.points:
            q = cmap.table[p]
            if q in seen:
                raise NotInjective((seen[q], p), q)
            seen[q] = p
    if f.domain != g.codomain or f.codomain != g.domain:
        raise NotInjective(("f", "g"), "spaces do not pair up")

    g_inv = {x: y for y, x in g.table.items()}
    f_inv = {y: x for x, y in f.table.items()}

    # state per X point: True -> use f (X-chain or cycle), False -> use g⁻¹
    state: dict[PointId, bool] = {}
    for x0 in f.domain.points:
        if x0 in state:
            continue
        path_x: list[PointId] = []
        x = x0
        use_f: bool
        while True:
            if x in state:
                use_f = state[x]
                break
            path_x.append(x)
            y = g_inv.get(x)
            if y is None:
                use_f = True  # stopped in X \ Im(g)
                break
            x_next = f_inv.get(y)
            if x_next is None:
                use_f = False  # stopped in Y \ Im(f)
                break
            if x_next == x0:
                use_f = True  # cycle closed
                break
            x = x_next
        for p in path_x:
            state[p] = use_f
    table = {x: f.table[x] if state[x] else g_inv[x] for x in f.domain.points}
    return CoarseMap(f.domain, f.codomain, table)


@dataclass(frozen=True)
class ExtractParams:
    """Grid and strategy for the extraction search.

    The grids default to the standard search ranges; the search tries
    small fattening radii first (tighter closeness bounds) and within each
    radius the largest threshold first (smallest candidate sets).
    """

    strategy: str = "support"
    eps_grid: tuple[float, ...] = (0.5, 0.4, 0.3, 0.2, 0.1, 0.05)
    m_grid: tuple[float, ...] = (0, 1, 2, 3, 5, 8)
    r_grid: tuple[float, ...] = (1, 2, 3, 5)
    threshold: float = 0.5
    delta: float = 0.5
    seed: int = 0

    def cells(self) -> list[dict]:
        if self.strategy == "support":
            return [
                {"eps": float(eps), "m": float(m)}
                for m in sorted(self.m_grid)
                for eps in sorted(self.eps_grid, reverse=True)
            ]
        if self.strategy == "flattened":
            return [{"r": float(r), "threshold": self.threshold}
                    for r in sorted(self.r_grid)]
        raise ExtractionFailed("params", self.strategy, {})


@dataclass(frozen=True)
class BijectionCertificate:
    """Extracted bijection plus everything needed to re-check it."""

    h: CoarseMap
    f_raw: CoarseMap
    g_raw: CoarseMap
    closeness_h_f: float
    expansion_h: ExpansionProfile
    expansion_h_inv: ExpansionProfile
    params: dict
    goal_residual: float
    goal_witness: dict
    mutual: dict
    verified: bool
    failures: tuple[str, ...]

    def to_jsonable(self) -> dict:
        def profile(p: ExpansionProfile) -> dict:
            return {format(r, "g"): float(s) for r, s in p.as_sorted_items()}

        return {
            "schema": "roe-cert/1",
            "h": {str(k): v for k, v in self.h.table.items()},
            "f_raw": {str(k): v for k, v in self.f_raw.table.items()},
            "g_raw": {str(k): v for k, v in self.g_raw.table.items()},
            "params": self.params,
            "closeness_h_f": float(self.closeness_h_f),
            "goal_residual": float(self.goal_residual),
            "goal_witness": {
                "side": self.goal_witness["side"],
                "set": [str(p) for p in self.goal_witness["set"]],
                "residual": float(self.goal_witness["residual"]),
            },
            "expansion": {k: v for k, v in
                          self.to_profile_dict(self.expansion_h).items()},
            "expansion_inv": {k: v for k, v in
                              self.to_profile_dict(self.expansion_h_inv).items()},
            "closeness_fg_id": float(self.mutual["closeness_fg_id"]),
            "closeness_gf_id": float(self.mutual["closeness_gf_id"]),
            "verified": self.verified,
            "failures": list(self.failures),
        }

    @staticmethod
    def to_profile_dict(p: ExpansionProfile) -> dict:
        return {format(r, "g"): float(s) for r, s in p.as_sorted_items()}


def _build_family(iso: SpatialIsomorphism, cell: dict, direction: str) -> SupportFamily:
    if "eps" in cell:
        return support_family(iso, cell["eps"], cell["m"], direction=direction)
    return support_family_flattened(iso, cell["r"], cell["threshold"],
                                    direction=direction)


def _residual_for_family(iso: SpatialIsomorphism, cell: dict,
                         samplers: tuple[SetSampler, SetSampler],
                         seed: int) -> tuple[float, dict]:
    if "eps" in cell:
        return goal_estimate(iso, cell["eps"], cell["m"], samplers=samplers,
                             seed=seed)
    # Flattened strategy: measure the same off-support residual against the
    # chosen families at their own threshold, with no extra fattening.
    fwd = support_family_flattened(iso, cell["r"], cell["threshold"], "forward")
    bwd = support_family_flattened(iso, cell["r"], cell["threshold"], "backward")
    from . import _kernels  # local import keeps module load light
    import numpy as np

    worst = 0.0
    witness = {"side": "source", "set": (), "residual": 0.0}
    for family, sampler, side, direction in (
        (fwd, samplers[0], "source", "forward"),
        (bwd, samplers[1], "target", "backward"),
    ):
        matrix = iso.matrix_for(direction)
        src, tgt = iso.spaces_for(direction)
        tgt_index = {p: i for i, p in enumerate(tgt.points)}
        for subset in sampler.sample():
            image = family.union(subset)
            rows = np.array(sorted(
                i for p, i in tgt_index.items() if p not in image), dtype=np.intp)
            cols = np.array(src.indices(subset), dtype=np.intp)
            value = _kernels.masked_spectral_norm(matrix, rows, cols)
            if value > worst:
                worst = value
                witness = {"side": side, "set": subset, "residual": value}
    return worst, witness


def extract(
    iso: SpatialIsomorphism,
    params: ExtractParams | None = None,
    reverse_tie_break: bool = False,
) -> BijectionCertificate:
    """Run the full pipeline across the parameter grid.

    Families are built from the isomorphism in both directions with
    symmetric roles; the first grid cell whose matching condition holds in
    both directions wins. Exhausting the grid raises
    :class:`ExtractionFailed` with the last violator and the residual
    diagnostics per attempted cell.
    """
    params = params or ExtractParams()
    cells = params.cells()
    if not cells:
        raise ExtractionFailed("params", "empty grid", {})
    samplers = (SetSampler(iso.source, seed=params.seed),
                SetSampler(iso.target, seed=params.seed))
    attempts = []
    last_stage, last_witness = "hall_forward", None
    for cell in cells:
        fwd = _build_family(iso, cell, "forward")
        fwd_witness = hall_check(fwd, reverse_tie_break=reverse_tie_break)
        if not fwd_witness.matched:
            attempts.append({"cell": cell, "stage": "hall_forward",
                             "deficiency_size": len(fwd_witness.deficiency),
                             "neighborhood_size": len(fwd_witness.neighborhood)})
            last_stage, last_witness = "hall_forward", fwd_witness
            continue
        bwd = _build_family(iso, cell, "backward")
        bwd_witness = hall_check(bwd, reverse_tie_break=reverse_tie_break)
        if not bwd_witness.matched:
            attempts.append({"cell": cell, "stage": "hall_backward",
                             "deficiency_size": len(bwd_witness.deficiency),
                             "neighborhood_size": len(bwd_witness.neighborhood)})
            last_stage, last_witness = "hall_backward", bwd_witness
            continue

        f_raw = CoarseMap(iso.source, iso.target, dict(fwd_witness.matching))
        g_raw = CoarseMap(iso.target, iso.source, dict(bwd_witness.matching))
        h = csb_combine(f_raw, g_raw)
        residual, witness = _residual_for_family(iso, cell, samplers, params.seed)
        radii = default_radii(iso.source)
        mutual = verify_mutual_inverse(h, h.inverse(), radii)
        close_h_f = closeness(h, f_raw)
        failures = []
        if residual >= params.delta:
            failures.append(
                f"goal residual {residual:.6g} not below delta {params.delta:g}")
        cert = BijectionCertificate(
            h=h,
            f_raw=f_raw,
            g_raw=g_raw,
            closeness_h_f=close_h_f,
            expansion_h=mutual["expansion_f"],
            expansion_h_inv=mutual["expansion_g"],
            params={"strategy": params.strategy, **cell,
                    "delta": params.delta, "seed": params.seed},
            goal_residual=residual,
            goal_witness=witness,
            mutual={"closeness_fg_id": mutual["closeness_fg_id"],
                    "closeness_gf_id": mutual["closeness_gf_id"]},
            verified=not failures,
            failures=tuple(failures),
        )
        return cert
    raise ExtractionFailed(
        last_stage,
        {"deficiency": list(last_witness.deficiency) if last_witness else [],
         "neighborhood": list(last_witness.neighborhood) if last_witness else []},
        {"attempts": attempts},
    )


def verify_certificate(
    cert: BijectionCertificate,
    iso: SpatialIsomorphism,
    f_true: CoarseMap | None = None,
) -> dict:
    """Re-check a certificate against the isomorphism it came from.

    Re-validates bijectivity, the chain dichotomy (each point maps by the
    raw forward selection or against the raw backward selection), the
    recorded closeness and expansion profiles, and the counting inequality
    |A| <= |candidates(A)| on sampled sets, which is independent of any
    norm computation. With ``f_true`` the report also carries the exact
    closeness of h to the truth.
    """
    h = cert.h
    if not h.is_bijective():
        raise CertificateInvalid("h", "bijection", "not bijective")
    g_inv = {x: y for y, x in cert.g_raw.table.items()}
    for x in h.domain.points:
        if h.table[x] != cert.f_raw.table[x] and g_inv.get(x) != h.table[x]:
            raise CertificateInvalid(
                "h", f"{x!r} -> f_raw or g_raw-chain image", h.table[x])
    recomputed = closeness(h, cert.f_raw)
    if abs(recomputed - cert.closeness_h_f) > 1e-12:
        raise CertificateInvalid("closeness_h_f", recomputed, cert.closeness_h_f)
    radii = sorted(cert.expansion_h.samples)
    fresh = expansion_profile(h, radii)
    for r in radii:
        if abs(fresh.samples[r] - cert.expansion_h.samples[r]) > 1e-12:
            raise CertificateInvalid(f"expansion[{r}]", fresh.samples[r],
                                     cert.expansion_h.samples[r])

    report = {
        "bijective": True,
        "dichotomy": True,
        "closeness_h_f": recomputed,
    }
    if "eps" in cert.params:
        family = support_family(iso, cert.params["eps"], cert.params["m"])
        sampler = SetSampler(iso.source, seed=cert.params.get("seed", 0))
        counting_ok = True
        worst = None
        for subset in sampler.sample():
            candidates = family.union(subset)
            if len(subset) > len(candidates):
                counting_ok = False
                worst = subset
                break
        if not counting_ok:
            raise CertificateInvalid("counting", f"|A| <= |candidates| for {worst!r}",
                                     "violated")
        report["counting_checked"] = True
    if f_true is not None:
        report["closeness_h_truth"] = closeness(h, f_true)
    return report
