import numpy as np
import pytest

from hermcok.cokernel import (
    ClampError,
    batch_elementary_divisors,
    cokernel_type,
    count_automorphisms,
    count_hom,
    count_submodules,
    count_surjections,
    count_surjections_from_clamped,
    divisors_to_partition,
    elementary_divisors,
    module_order,
)
from hermcok.oracles import brute_force_cokernel_type
from hermcok.partitions import Partition, partitions_up_to
from hermcok.ring import make_spec
from hermcok.sampler import sample_batch, sample_haar

SPECS = [
    make_spec(2, "unram", None, 4),
    make_spec(3, "unram", None, 3),
    make_spec(3, "ram-odd", 1, 4),
    make_spec(3, "ram-odd", 2, 5),
    make_spec(2, "ram2-i", 1, 5),
    make_spec(2, "ram2-ii", 1, 4),
]


def P(*parts, clamp=None):
    return Partition(parts, clamp)


def test_divisor_examples():
    sp = make_spec(2, "unram", None, 3)
    A = [[sp.elem(2, 0), sp.zero], [sp.zero, sp.elem(4, 0)]]
    assert elementary_divisors(A, 3) == [1, 2]
    assert elementary_divisors(A, 1) == [1, 1]
    assert cokernel_type(A, 3) == P(2, 1, clamp=3)
    sp = make_spec(3, "ram-odd", 1, 4)
    A = [[sp.zero, sp.pi], [-sp.pi, sp.zero]]
    assert cokernel_type(A, 4) == P(1, 1, clamp=4)
    Z = [[sp.zero, sp.zero], [sp.zero, sp.zero]]
    assert cokernel_type(Z, 2) == P(2, 2, clamp=2)


def test_clamp_above_truncation():
    sp = make_spec(2, "unram", None, 2)
    with pytest.raises(ClampError):
        elementary_divisors([[sp.one]], 3)


def test_batch_matches_scalar():
    for sp in SPECS:
        for n in (1, 3, 5):
            X, Y = sample_batch(sp, n, 7, range(300))
            for a in (1, sp.M):
                D = batch_elementary_divisors(sp, X, Y, a)
                rng_rows = range(0, 300, 7)
                for b in rng_rows:
                    from hermcok.sampler import _to_matrix

                    A = _to_matrix(sp, X[b], Y[b])
                    assert sorted(elementary_divisors(A, a), reverse=True) == list(D[b])
                    assert divisors_to_partition(D[b], a) == cokernel_type(A, a)


def test_scalar_matches_brute_force_subgroup():
    rng = np.random.default_rng(1)
    for sp in [make_spec(2, "unram", None, 2), make_spec(3, "ram-odd", 1, 2), make_spec(2, "ram2-ii", 1, 3)]:
        for _ in range(40):
            A = sample_haar(sp, 2, rng)
            assert brute_force_cokernel_type(A, sp.M) == cokernel_type(A, sp.M)


def test_divisor_invariance_under_unimodular_change():
    rng = np.random.default_rng(2)
    from hermcok.classify import _matmul

    for sp in SPECS:
        for _ in range(30):
            A = sample_haar(sp, 3, rng).rows()
            U = [[sp.one if i == j else sp.zero for j in range(3)] for i in range(3)]
            U[0][1] = sp.random_elem(rng)
            U[2][0] = sp.random_elem(rng)
            V = [[sp.one if i == j else sp.zero for j in range(3)] for i in range(3)]
            V[1][2] = sp.random_elem(rng)
            B = _matmul(_matmul(U, A), V)
            assert cokernel_type(A, sp.M) == cokernel_type(B, sp.M)


def test_automorphism_examples():
    assert count_automorphisms(P(1), 2) == 1
    assert count_automorphisms(P(1, 1), 2) == 6
    assert count_automorphisms(P(2), 2) == 2
    assert count_automorphisms(P(2, 1), 2) == 8
    assert count_automorphisms(P(1, 1, 1), 2) == 168
    assert count_automorphisms(P(), 5) == 1


def test_surjection_examples():
    # onto Z/2: all nonzero maps from (Z/2)^2
    assert count_surjections(P(1, 1), P(1), 2) == 3
    assert count_surjections(P(2), P(1), 2) == 1
    assert count_surjections(P(1), P(2), 2) == 0
    assert count_surjections(P(2, 1), P(2, 1), 2) == count_automorphisms(P(2, 1), 2)
    assert count_surjections(P(3), P(), 2) == 1


def test_hom_and_submodule_counts():
    assert count_hom(P(2, 1), P(1), 3) == 9
    assert count_submodules(P(1), P(1, 1), 2) == 3
    assert count_submodules(P(1), P(2), 2) == 1
    assert count_submodules(P(2), P(1, 1), 2) == 0
    assert module_order(P(2, 1), 3) == 27


def test_submodule_count_sums_to_subgroup_count():
    # subgroups of (Z/p)^2 x Z/p^2 by type, compared with cotype symmetry
    for q in (2, 3):
        for lam in partitions_up_to(4):
            for mu in partitions_up_to(lam.size):
                assert count_submodules(mu, lam, q) >= 0
            total = sum(count_submodules(mu, lam, q) for mu in partitions_up_to(lam.size))
            assert total >= lam.size + 1 or lam.size == 0


def test_clamped_surjection_guard():
    with pytest.raises(ClampError):
        count_surjections_from_clamped(P(1, 1, clamp=1), P(2), 2)
    assert count_surjections_from_clamped(P(2, 1, clamp=2), P(1), 2) == 3
