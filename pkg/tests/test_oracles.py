from fractions import Fraction

import pytest

from hermcok.cokernel import count_automorphisms, count_surjections
from hermcok.oracles import (
    BudgetExceeded,
    brute_force_automorphisms,
    brute_force_hom_count,
    brute_force_invertible_count,
    brute_force_surjections,
    brute_force_surjections_direct,
    cached_pairing_data,
    charsum_exhaustive,
    count_full_rank_pattern,
    count_perfect_hermitian_pairings,
    pairing_census,
)
from hermcok.cokernel import count_hom
from hermcok.partitions import Partition, partitions_up_to
from hermcok.ring import make_spec
from hermcok.theory import count_invertible_hermitian, count_invertible_symmetric


def P(*parts):
    return Partition(parts)


def test_invertible_counts_against_closed_forms():
    assert [brute_force_invertible_count(n, 2) for n in (1, 2, 3)] == [1, 10, 280]
    for p in (2, 3):
        for n in (1, 2):
            assert brute_force_invertible_count(n, p, "hermitian") == count_invertible_hermitian(n, p)
        for n in (1, 2, 3):
            assert brute_force_invertible_count(n, p, "symmetric") == count_invertible_symmetric(n, p)


def test_invertible_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_invertible_count(3, 3, "hermitian", budget=1000)


def test_direct_surjections_match_closed_form():
    for q in (2, 3):
        for lam in partitions_up_to(3):
            for mu in partitions_up_to(3):
                if q ** sum(min(x, y) for x in lam for y in mu) > 2**12:
                    continue
                assert brute_force_surjections_direct(lam, mu, q) == count_surjections(lam, mu, q)
                assert brute_force_hom_count(lam, mu, q) == count_hom(lam, mu, q)


@pytest.mark.parametrize("method", ["subspace", "nested"])
def test_pattern_surjections_match_closed_form(method):
    for q in (2, 3, 4):
        for lam in partitions_up_to(4):
            for mu in partitions_up_to(3):
                assert brute_force_surjections(lam, mu, q, method) == count_surjections(lam, mu, q)


def test_automorphisms_all_methods_agree():
    for q in (2, 3, 4):
        for mu in partitions_up_to(3):
            expect = count_automorphisms(mu, q)
            assert brute_force_automorphisms(mu, q, "subspace") == expect
            assert brute_force_automorphisms(mu, q, "nested") == expect
            if q ** sum(min(x, y) for x in mu for y in mu) <= 2**12:
                assert brute_force_automorphisms(mu, q, "direct") == expect


def test_full_rank_pattern_counts():
    # full-rank 2x2 matrices over F_2 and F_3
    full = [[True, True], [True, True]]
    assert count_full_rank_pattern(full, 2) == 6
    assert count_full_rank_pattern(full, 3) == 48
    tri = [[True, True], [False, True]]
    assert count_full_rank_pattern(tri, 3) == 2 * 2 * 3
    assert count_full_rank_pattern(tri, 3, "nested") == 12


def test_pairing_counts_examples():
    unram2 = make_spec(2, "unram", None, 1)
    ram3 = make_spec(3, "ram-odd", 1, 1)
    expected = {
        (1,): (1, 0),
        (1, 1): (10, 2),
        (2,): (2, 2),
        (2, 1): (8, 0),
        (3,): (4, 0),
    }
    for parts, (u, r) in expected.items():
        assert count_perfect_hermitian_pairings(P(*parts), unram2) == u
        assert count_perfect_hermitian_pairings(P(*parts), ram3) == r


def test_parity_law_for_ramified_pairings():
    # odd-multiplicity parts admit no perfect pairing in the ramified case
    for sp in [make_spec(3, "ram-odd", 1, 1), make_spec(2, "ram2-i", 1, 1), make_spec(2, "ram2-ii", 1, 1)]:
        assert count_perfect_hermitian_pairings(P(1), sp) == 0
        assert count_perfect_hermitian_pairings(P(2, 1), sp) == 0
        assert count_perfect_hermitian_pairings(P(1, 1), sp) > 0


def test_intrinsic_diagonal_rule_breaks_parity_for_ram2():
    sp = make_spec(2, "ram2-i", 1, 1)
    assert count_perfect_hermitian_pairings(P(1), sp, diagonal="intrinsic") > 0


def test_orbit_stabilizer():
    for sp in [make_spec(2, "unram", None, 1), make_spec(3, "ram-odd", 1, 1)]:
        for g in partitions_up_to(3):
            census = pairing_census(g, sp)
            assert census.identity_holds()
            assert census.mass() == Fraction(census.perfect, count_automorphisms(g, sp.q))


def test_pairing_budget():
    with pytest.raises(BudgetExceeded):
        count_perfect_hermitian_pairings(P(3, 3), make_spec(2, "unram", None, 1), budget=100)


def test_pairing_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("HERMCOK_CACHE", str(tmp_path))
    sp = make_spec(2, "unram", None, 1)
    first = cached_pairing_data(P(1, 1), sp)
    assert (tmp_path / "pairings.json").exists()
    assert cached_pairing_data(P(1, 1), sp) == first
    assert first["perfect"] == 10 and first["mass"] == "1/18"


@pytest.mark.parametrize(
    "spec",
    [
        make_spec(2, "unram", None, 1),
        make_spec(3, "unram", None, 1),
        make_spec(3, "ram-odd", 1, 1),
        make_spec(2, "ram2-i", 1, 1),
        make_spec(2, "ram2-ii", 1, 1),
    ],
    ids=lambda s: f"{s.p}-{s.kind.value}",
)
def test_character_sum_identity(spec):
    checked, bad, zeros = charsum_exhaustive(spec, 1, P(1))
    assert checked > 0 and bad == 0 and 0 < zeros < checked
