"""Built-in invariant suite behind ``roe selftest``.

Each check re-validates one documented invariant at fixed seeds and desk
scale. The suite is self-contained (no test framework) so a deployed
build can be smoke-checked in place.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import (
    CoarseMap,
    ExtractParams,
    SetSampler,
    apply,
    block_norm,
    closeness,
    conditional_expectation,
    csb_combine,
    extract,
    flattened_indicator,
    from_bijection,
    goal_estimate,
    growth,
    hall_check,
    identity_map,
    indicator,
    numerical_rank,
    op_norm,
    perturb,
    propagation,
    quasi_local_profile,
    random_local_unitary,
    separated_family,
    so_variation,
    sum_flattened,
    support_family,
    support_set,
)
from .generators import grid_space, path_space, random_bce, tree_space
from .iso import SupportFamily
from .operator import LinearOperator
from .space import ball, build_space, expansion_profile


def _random_operator(space, rng, band=None):
    n = len(space)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if band is not None:
        m = np.where(space.dist <= band, m, 0.0)
    return LinearOperator(space, space, m)


def check_ball_growth_monotone():
    for space, _ in (path_space(10), grid_space(4, 4)):
        prev_ball, prev_growth = set(), 0
        for r in range(0, 6):
            b = ball(space, {space.points[0]}, r)
            assert prev_ball <= b, "balls must be nested"
            g = growth(space, r)
            assert g >= prev_growth, "growth must be monotone"
            prev_ball, prev_growth = b, g


def check_expansion_isometry():
    space, _ = path_space(10)
    rev = CoarseMap(space, space, {i: 9 - i for i in range(10)})
    prof = expansion_profile(rev, [0, 1, 2, 3, 4, 9])
    last = -1.0
    for r, s in sorted(prof.samples.items()):
        assert s <= r, "isometry must not expand"
        assert s >= last, "profile must be monotone"
        last = s
    assert prof.samples[9.0] == 9.0, "attained distance must be exact"


def check_closeness_pseudometric():
    rng = np.random.default_rng(11)
    space, _ = path_space(8)
    maps = [
        CoarseMap(space, space,
                  {p: int(rng.integers(len(space))) for p in space.points})
        for _ in range(3)
    ]
    for f in maps:
        assert closeness(f, f) == 0.0
    f, g, h = maps
    assert abs(closeness(f, g) - closeness(g, f)) == 0.0
    assert closeness(f, h) <= closeness(f, g) + closeness(g, h) + 1e-12


def check_graph_metrics_valid():
    for space in (path_space(10)[0], grid_space(3, 3)[0], tree_space(2, 3)[0]):
        build_space(space.points, space.dist, space.label)  # revalidates axioms


def check_expectation_properties():
    rng = np.random.default_rng(5)
    space, _ = path_space(20)
    a = _random_operator(space, rng)
    e = conditional_expectation(a)
    assert np.array_equal(conditional_expectation(e).entries, e.entries)
    assert op_norm(e) <= op_norm(a) + 1e-9
    d1 = np.diag(rng.standard_normal(20) + 1j * rng.standard_normal(20))
    d2 = np.diag(rng.standard_normal(20) + 1j * rng.standard_normal(20))
    lhs = conditional_expectation(
        LinearOperator(space, space, d1 @ a.entries @ d2)).entries
    rhs = d1 @ e.entries @ d2
    assert np.allclose(lhs, rhs, atol=1e-12)


def check_propagation_subadditive():
    rng = np.random.default_rng(6)
    space, _ = path_space(16)
    for _ in range(5):
        a = _random_operator(space, rng, band=2)
        b = _random_operator(space, rng, band=3)
        assert propagation(a @ b, 1e-9) <= propagation(a) + propagation(b) + 1e-12


def check_quasi_local_profile():
    rng = np.random.default_rng(7)
    space, _ = path_space(12)
    a = _random_operator(space, rng, band=2)
    prof = quasi_local_profile(a, [0, 1, 2, 3, 4])
    values = [prof.samples[r] for r in sorted(prof.samples)]
    assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))
    assert prof.samples[0.0] <= op_norm(a) + 1e-9
    assert prof.samples[3.0] == 0.0, "profile must vanish beyond the propagation"


def check_norm_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        oracle = float(np.linalg.svd(m, compute_uv=False)[0])
        assert abs(op_norm(m) - oracle) <= 1e-8 * max(1.0, oracle)


def check_block_vs_band():
    rng = np.random.default_rng(9)
    space, _ = path_space(12)
    a = _random_operator(space, rng, band=3)
    prof = quasi_local_profile(a, [2])
    for _ in range(10):
        A = [int(i) for i in rng.choice(12, size=3, replace=False)]
        B = [j for j in range(12)
             if min(space.dist[j, i] for i in A) >= 2]
        if not B:
            continue
        bound = prof.samples[2.0]
        assert block_norm(a, A, B) <= bound * (1 + 2e-9) + 1e-12


def check_flattened_fixes_indicator():
    space, _ = path_space(9)
    g = flattened_indicator(space, {2, 3}, 2.5)
    chi = indicator(space, {2, 3})
    assert np.allclose(np.diag(chi.entries).real * g.values,
                       np.diag(chi.entries).real)


def check_variation_lipschitz():
    space, _ = path_space(30)
    r = 4.0
    g = flattened_indicator(space, {0}, r)
    for rp in (1.0, 2.0, 3.0, 4.0):
        assert so_variation(g, rp) <= rp / r + 1e-12


def check_separated_variation_bound():
    space, _ = path_space(100)
    family, exhausted = separated_family(space, 3, first_index=1)
    assert not exhausted
    radii = [1.0, 2.0, 3.0]
    g = sum_flattened(space, family, radii)
    for n in (2, 3):
        excluded = ball(space, set().union(*family[:n]), n)
        for r in range(1, n):
            assert so_variation(g, r, excluded) <= r / n + 1e-12


def check_variation_monotone():
    space, _ = path_space(20)
    g = flattened_indicator(space, {0}, 5.0)
    v1 = so_variation(g, 1.0)
    v2 = so_variation(g, 2.0)
    assert v1 <= v2 + 1e-12
    small = so_variation(g, 2.0, excluded={0, 1})
    assert small <= v2 + 1e-12


def check_iso_isometry_rank():
    rng = np.random.default_rng(12)
    space, _ = grid_space(4, 4)
    iso = perturb(from_bijection(identity_map(space)),
                  random_local_unitary(space, 1.0, seed=3))
    for _ in range(5):
        a = _random_operator(space, rng, band=2)
        assert abs(op_norm(apply(iso, a)) - op_norm(a)) <= 1e-8 * max(1, op_norm(a))
    A = list(space.points[:5])
    assert numerical_rank(apply(iso, indicator(space, A)), 1e-8) == 5


def check_support_symmetry():
    space, _ = grid_space(3, 3)
    iso = perturb(from_bijection(identity_map(space)),
                  random_local_unitary(space, 1.0, seed=4))
    for x in space.points:
        for y in space.points:
            fwd = abs(iso.u[space.index(y), space.index(x)]) * \
                float(np.linalg.norm(iso.u[:, space.index(x)]))
            bwd = abs(iso.u_inv[space.index(x), space.index(y)]) * \
                float(np.linalg.norm(iso.u_inv[:, space.index(y)]))
            assert abs(fwd - bwd) <= 1e-9


def check_support_monotonicity():
    space, _ = path_space(8)
    iso = perturb(from_bijection(identity_map(space)),
                  random_local_unitary(space, 1.0, seed=5))
    for x in space.points:
        assert support_set(iso, x, 0.4) >= support_set(iso, x, 0.6)
    fam0 = support_family(iso, 0.3, 0)
    fam1 = support_family(iso, 0.3, 1)
    for p in space.points:
        assert set(fam0.sets[p]) <= set(fam1.sets[p])
    r_small_m, _ = goal_estimate(iso, 0.3, 0)
    r_big_m, _ = goal_estimate(iso, 0.3, 1)
    assert r_big_m <= r_small_m + 1e-9
    r_small_eps, _ = goal_estimate(iso, 0.2, 0)
    assert r_small_eps <= r_small_m + 1e-9


def check_local_unitary_contract():
    space, _ = grid_space(4, 4)
    w = random_local_unitary(space, 1.0, seed=6)
    dev = op_norm(LinearOperator(space, space,
                                 w.entries.conj().T @ w.entries - np.eye(16)))
    assert dev <= 1e-10
    assert propagation(w, 1e-10) <= 1.0
    w2 = random_local_unitary(space, 1.0, seed=6)
    assert np.array_equal(w.entries, w2.entries)


def _brute_force_hall(sets: list[frozenset]) -> bool:
    n = len(sets)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            union = set().union(*(sets[i] for i in combo))
            if len(combo) > len(union):
                return False
    return True


def check_hall_oracle():
    rng = np.random.default_rng(13)
    space, _ = path_space(8)
    for _ in range(50):
        sets = {}
        for p in space.points:
            k = int(rng.integers(0, 4))
            members = rng.choice(8, size=k, replace=False) if k else []
            sets[p] = tuple(int(i) for i in sorted(members))
        family = SupportFamily(space, space, sets, {})
        witness = hall_check(family)
        expected = _brute_force_hall([frozenset(sets[p]) for p in space.points])
        assert witness.matched == expected
        if not witness.matched:
            union = family.union(witness.deficiency)
            assert len(witness.deficiency) > len(union)


def check_csb_dichotomy():
    rng = np.random.default_rng(14)
    space, _ = path_space(10)
    for _ in range(50):
        perm_f = rng.permutation(10)
        perm_g = rng.permutation(10)
        f = CoarseMap(space, space, {i: int(perm_f[i]) for i in range(10)})
        g = CoarseMap(space, space, {i: int(perm_g[i]) for i in range(10)})
        h = csb_combine(f, g)
        assert h.is_bijective()
        g_inv = {x: y for y, x in g.table.items()}
        for x in space.points:
            assert h.table[x] in (f.table[x], g_inv.get(x))
    f = CoarseMap(space, space, {i: (i + 3) % 10 for i in range(10)})
    assert csb_combine(f, f.inverse()).table == f.table


def check_round_trip():
    for space, _ in (path_space(20), grid_space(5, 5), tree_space(2, 4)):
        f = random_bce(space, 2.0, seed=17)
        cert = extract(from_bijection(f),
                       ExtractParams(eps_grid=(0.5,), m_grid=(0,)))
        assert cert.h.table == f.table
        assert cert.goal_residual == 0.0


def check_counting_from_goal():
    space, _ = path_space(8)
    iso = perturb(from_bijection(identity_map(space)),
                  random_local_unitary(space, 1.0, seed=18))
    eps, m = 0.3, 1.0
    residual, _ = goal_estimate(iso, eps, m)
    assert residual < 1.0
    family = support_family(iso, eps, m)
    for subset in SetSampler(space, seed=0).sample():
        assert len(subset) <= len(family.union(subset))


def check_closeness_stability():
    space, _ = grid_space(4, 4)
    iso = perturb(from_bijection(identity_map(space)),
                  random_local_unitary(space, 1.0, seed=19))
    cert_a = extract(iso)
    cert_b = extract(iso, reverse_tie_break=True)
    family = support_family(iso, cert_a.params["eps"], cert_a.params["m"])
    bound = 2.0 * family.max_diameter()
    assert closeness(cert_a.h, cert_b.h) <= bound + 1e-12


CHECKS = [
    ("space.ball_growth_monotone", check_ball_growth_monotone),
    ("space.expansion_isometry", check_expansion_isometry),
    ("space.closeness_pseudometric", check_closeness_pseudometric),
    ("space.graph_metrics_valid", check_graph_metrics_valid),
    ("operator.expectation_properties", check_expectation_properties),
    ("operator.propagation_subadditive", check_propagation_subadditive),
    ("operator.quasi_local_profile", check_quasi_local_profile),
    ("operator.norm_oracle", check_norm_oracle),
    ("operator.block_vs_band", check_block_vs_band),
    ("functions.flattened_fixes_indicator", check_flattened_fixes_indicator),
    ("functions.variation_lipschitz", check_variation_lipschitz),
    ("functions.separated_variation_bound", check_separated_variation_bound),
    ("functions.variation_monotone", check_variation_monotone),
    ("iso.isometry_rank", check_iso_isometry_rank),
    ("iso.support_symmetry", check_support_symmetry),
    ("iso.support_monotonicity", check_support_monotonicity),
    ("iso.local_unitary_contract", check_local_unitary_contract),
    ("rigidity.hall_oracle", check_hall_oracle),
    ("rigidity.csb_dichotomy", check_csb_dichotomy),
    ("rigidity.round_trip", check_round_trip),
    ("rigidity.counting_from_goal", check_counting_from_goal),
    ("rigidity.closeness_stability", check_closeness_stability),
]


def run_all(verbose: bool = True) -> int:
    failures = 0
    for name, check in CHECKS:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            if verbose:
                print(f"FAIL {name}: {exc}")
        else:
            if verbose:
                print(f"PASS {name}")
    if verbose:
        total = len(CHECKS)
        print(f"{total - failures}/{total} checks passed")
    return failures
