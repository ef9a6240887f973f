"""Extraction pipeline: matching, chain combination, certificates."""

import itertools

import numpy as np
import pytest

from roekit import (
    CoarseMap,
    ExtractParams,
    closeness,
    csb_combine,
    extract,
    from_bijection,
    hall_check,
    identity_map,
    perturb,
    random_local_unitary,
    select_injection,
    support_family,
    verify_certificate,
)
from roekit.errors import (
    CertificateInvalid,
    ExtractionFailed,
    HallFailed,
    NotInjective,
)
from roekit.generators import grid_space, path_space, random_bce, random_phases
from roekit.iso import SupportFamily
from roekit.serialize import dumps_canonical
from roekit.space import build_space


def family_from_dict(space, sets):
    return SupportFamily(space, space,
                         {p: tuple(sorted(sets.get(p, ()))) for p in space.points},
                         {})


def brute_force_hall(sets_list):
    """Oracle: enumerate every subset and check the counting condition."""
    n = len(sets_list)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            union = set().union(*(sets_list[i] for i in combo))
            if size > len(union):
                return False, combo
    return True, None


def brute_force_selection_exists(sets_list):
    """Oracle: enumerate all injective selections directly."""
    n = len(sets_list)

    def go(i, used):
        if i == n:
            return True
        for candidate in sets_list[i]:
            if candidate not in used:
                if go(i + 1, used | {candidate}):
                    return True
        return False

    return go(0, frozenset())


def two_spaces():
    x = build_space([0, 1, 2], [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "x")
    y = build_space(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "y")
    return x, y


class TestHallCheck:
    def test_bijection_family(self, p5):
        sets = {x: (4 - x,) for x in range(5)}
        witness = hall_check(family_from_dict(p5, sets))
        assert witness.matched
        assert witness.matching == {x: 4 - x for x in range(5)}

    def test_two_into_one_deficient(self):
        space, _ = path_space(2)
        sets = {0: (0,), 1: (0,)}
        witness = hall_check(family_from_dict(space, sets))
        assert not witness.matched
        assert set(witness.deficiency) == {0, 1}
        assert set(witness.neighborhood) == {0}

    def test_complete_family_matches(self, p5):
        sets = {x: tuple(range(5)) for x in range(5)}
        witness = hall_check(family_from_dict(p5, sets))
        assert witness.matched
        assert sorted(witness.matching.values()) == list(range(5))

    def test_empty_set_forces_deficiency(self, p5):
        sets = {x: (x,) for x in range(5)}
        sets[2] = ()
        witness = hall_check(family_from_dict(p5, sets))
        assert not witness.matched
        assert 2 in witness.deficiency

    def test_matches_brute_force_on_random_families(self):
        rng = np.random.default_rng(20)
        space, _ = path_space(9)
        for _ in range(120):
            sets = {}
            for p in range(9):
                k = int(rng.integers(0, 4))
                members = rng.choice(9, size=k, replace=False) if k else []
                sets[p] = tuple(int(v) for v in sorted(members))
            family = family_from_dict(space, sets)
            witness = hall_check(family)
            sets_list = [frozenset(sets[p]) for p in range(9)]
            expected, _ = brute_force_hall(sets_list)
            assert witness.matched == expected
            assert expected == brute_force_selection_exists(sets_list)
            if witness.matched:
                values = list(witness.matching.values())
                assert len(set(values)) == len(values)
                for p, q in witness.matching.items():
                    assert q in sets[p]
            else:
                union = family.union(witness.deficiency)
                assert len(witness.deficiency) > len(union)


class TestSelectInjection:
    def test_bijection_forced(self, p5):
        sets = {x: (4 - x,) for x in range(5)}
        f = select_injection(family_from_dict(p5, sets))
        assert f.table == {x: 4 - x for x in range(5)}

    def test_unique_perfect_matching(self):
        space, _ = path_space(2)
        sets = {0: (0, 1), 1: (1,)}
        f = select_injection(family_from_dict(space, sets))
        assert f.table == {0: 0, 1: 1}

    def test_deficient_raises_with_witness(self):
        space, _ = path_space(3)
        sets = {0: (0,), 1: (0,), 2: (1, 2)}
        with pytest.raises(HallFailed) as exc:
            select_injection(family_from_dict(space, sets))
        union = set().union(*(sets[p] for p in exc.value.deficiency))
        assert len(exc.value.deficiency) > len(union)


class TestCsbCombine:
    def test_mutually_inverse_gives_f(self, p5):
        f = CoarseMap(p5, p5, {x: (x + 2) % 5 for x in range(5)})
        h = csb_combine(f, f.inverse())
        assert h.table == f.table

    def test_six_cycle_by_hand(self):
        x, y = two_spaces()
        f = CoarseMap(x, y, {0: "a", 1: "b", 2: "c"})
        g = CoarseMap(y, x, {"a": 1, "b": 2, "c": 0})
        # chain trace by hand: 0 <- c <- 2 <- b <- 1 <- a <- 0 is one cycle,
        # so every point uses f
        h = csb_combine(f, g)
        assert h.table == f.table

    def test_not_injective_rejected(self, p5):
        f = CoarseMap(p5, p5, {x: 0 for x in range(5)})
        with pytest.raises(NotInjective):
            csb_combine(f, identity_map(p5))

    def test_dichotomy_and_bijectivity(self):
        rng = np.random.default_rng(21)
        space, _ = path_space(12)
        for _ in range(100):
            pf = rng.permutation(12)
            pg = rng.permutation(12)
            f = CoarseMap(space, space, {i: int(pf[i]) for i in range(12)})
            g = CoarseMap(space, space, {i: int(pg[i]) for i in range(12)})
            h = csb_combine(f, g)
            assert h.is_bijective()
            g_inv = {v: k for k, v in g.table.items()}
            for xq in range(12):
                assert h.table[xq] in (f.table[xq], g_inv.get(xq))

    def test_stopper_classification(self):
        # f misses c, g misses 2: the chain through b must use g-inverse
        x, y = two_spaces()
        f = CoarseMap(x, y, {0: "a", 1: "b", 2: "b"})
        with pytest.raises(NotInjective):
            csb_combine(f, CoarseMap(y, x, {"a": 0, "b": 1, "c": 1}))


class TestExtract:
    def test_reversal_exact(self, p5):
        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        cert = extract(from_bijection(rev),
                       ExtractParams(eps_grid=(0.5,), m_grid=(0,)))
        assert cert.h.table == rev.table
        assert cert.closeness_h_f == 0.0
        assert cert.goal_residual == 0.0
        assert cert.verified

    def test_phase_twist_identical_certificate(self, p5):
        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        plain = extract(from_bijection(rev))
        twisted = extract(from_bijection(rev, phases=random_phases(p5, seed=22)))
        assert dumps_canonical(plain.to_jsonable()) \
            == dumps_canonical(twisted.to_jsonable())

    def test_perturbed_grid_bound_recorded(self):
        space, _ = grid_space(6, 6)
        ident = identity_map(space)
        iso = perturb(from_bijection(ident),
                      random_local_unitary(space, 1.0, seed=23))
        cert = extract(iso)
        m = cert.params["m"]
        # recovered bijection stays near the truth: the support sets live in
        # the perturbation cells (diameter <= 1) fattened by m
        assert closeness(cert.h, ident) <= m + 1.0

    def test_grid_search_advances(self):
        # tiny threshold grid fails at eps=0.9 (blocks dilute columns) but
        # a later cell succeeds
        space, _ = grid_space(4, 4)
        iso = perturb(from_bijection(identity_map(space)),
                      random_local_unitary(space, 1.0, seed=24))
        cert = extract(iso, ExtractParams(eps_grid=(0.9, 0.3), m_grid=(0,)))
        assert cert.params["eps"] in (0.9, 0.3)
        assert cert.h.is_bijective()

    def test_exhausted_grid_raises(self):
        space, _ = path_space(8)
        # a global rotation spreads every column; at eps 0.9 all support
        # sets are empty, so every cell fails with a deficiency witness
        iso = perturb(from_bijection(identity_map(space)),
                      random_local_unitary(space, float(space.diameter), seed=25))
        with pytest.raises(ExtractionFailed) as exc:
            extract(iso, ExtractParams(eps_grid=(0.9,), m_grid=(0, 1)))
        assert exc.value.stage in ("hall_forward", "hall_backward")
        assert exc.value.residuals["attempts"]

    def test_flattened_strategy_roundtrip(self, p5):
        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        cert = extract(from_bijection(rev),
                       ExtractParams(strategy="flattened", r_grid=(1.0,)))
        assert cert.h.table == rev.table
        assert cert.goal_residual == 0.0

    def test_round_trip_across_generated_spaces(self):
        from roekit.generators import cycle_space, tree_space

        spaces = [path_space(20)[0], cycle_space(12)[0],
                  grid_space(5, 5)[0], tree_space(2, 4)[0]]
        for space in spaces:
            assert len(space) <= 200
            f = random_bce(space, 2.0, seed=26)
            cert = extract(from_bijection(f),
                           ExtractParams(eps_grid=(0.5,), m_grid=(0,)))
            assert cert.h.table == f.table
            assert cert.goal_residual == 0.0

    def test_closeness_stability_under_tie_break(self):
        space, _ = grid_space(4, 4)
        iso = perturb(from_bijection(identity_map(space)),
                      random_local_unitary(space, 1.0, seed=27))
        cert_a = extract(iso)
        cert_b = extract(iso, reverse_tie_break=True)
        fam = support_family(iso, cert_a.params["eps"], cert_a.params["m"])
        assert closeness(cert_a.h, cert_b.h) <= 2.0 * fam.max_diameter() + 1e-12

    def test_counting_follows_goal(self):
        # whenever the sampled residual stays below 1, the counting
        # inequality holds on every sampled set, by direct enumeration
        from roekit import SetSampler, goal_estimate

        space, _ = path_space(8)
        iso = perturb(from_bijection(identity_map(space)),
                      random_local_unitary(space, 1.0, seed=28))
        eps, m = 0.3, 1.0
        residual, _ = goal_estimate(iso, eps, m)
        assert residual < 1.0
        fam = support_family(iso, eps, m)
        for subset in SetSampler(space, seed=0).sample():
            assert len(subset) <= len(fam.union(subset))


class TestVerifyCertificate:
    def test_reversal_certificate_passes(self, p5):
        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        cert = extract(from_bijection(rev))
        report = verify_certificate(cert, from_bijection(rev), f_true=rev)
        assert report["closeness_h_truth"] == 0.0
        assert report["bijective"] and report["dichotomy"]

    def test_tampered_h_rejected(self, p5):
        import dataclasses

        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        cert = extract(from_bijection(rev))
        broken_table = dict(cert.h.table)
        broken_table[0], broken_table[1] = broken_table[1], broken_table[0]
        broken = dataclasses.replace(
            cert, h=CoarseMap(p5, p5, broken_table))
        with pytest.raises(CertificateInvalid):
            verify_certificate(broken, from_bijection(rev))

    def test_truth_optional(self, p5):
        rev = CoarseMap(p5, p5, {x: 4 - x for x in range(5)})
        cert = extract(from_bijection(rev))
        report = verify_certificate(cert, from_bijection(rev))
        assert "closeness_h_truth" not in report
