"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
from fractions import Fraction

import pytest

from hermcok.cokernel import count_automorphisms, count_hom, count_surjections, cokernel_type
from hermcok.classify import block_cokernels_match, classify, verify_congruence
from hermcok.harness import (
    ExperimentConfig,
    run_distribution_experiment,
    run_moment_experiment,
    run_universality_sweep,
    sample_cokernel_types,
)
from hermcok.oracles import (
    brute_force_automorphisms,
    brute_force_invertible_count,
    brute_force_surjections,
    brute_force_surjections_direct,
    charsum_exhaustive,
    pairing_census,
)
from hermcok.partitions import Partition, partitions_up_to
from hermcok.ring import make_spec
from hermcok.sampler import EntryDistribution, sample_haar
from hermcok.theory import (
    TheoryContext,
    corank_probability,
    count_invertible_hermitian,
    count_invertible_symmetric,
    finite_n_haar_probability,
)

import numpy as np


@pytest.fixture
def verdict(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(number, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail} ({elapsed:.1f}s, limit {limit}s)"
        print(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        assert ok, line

    return emit


def test_1_invertible_counts(verdict):
    t0 = time.perf_counter()
    herm = [brute_force_invertible_count(n, 2, "hermitian") for n in (1, 2, 3)]
    ok = herm == [1, 10, 280] == [count_invertible_hermitian(n, 2) for n in (1, 2, 3)]
    sym = {}
    for p in (2, 3):
        sym[p] = [brute_force_invertible_count(n, p, "symmetric") for n in (1, 2, 3)]
        ok &= sym[p] == [count_invertible_symmetric(n, p) for n in (1, 2, 3)]
    ok &= sym[2][1] == 4 and sym[3][1] == 18
    verdict(1, ok, f"hermitian p=2 {herm}, symmetric p=2 {sym[2]}, p=3 {sym[3]}", time.perf_counter() - t0, 10)


def test_2_finite_n_exactness(verdict):
    t0 = time.perf_counter()
    parts = []
    ok = True
    for p, kind, u, target in [(2, "unram", None, Fraction(5, 8)), (3, "ram-odd", 1, Fraction(2, 3))]:
        cfg = ExperimentConfig(p=p, kind=kind, unit_param=u, n=2, clamp=1, samples=100_000, seed=20)
        rep = run_distribution_experiment(cfg)
        row = rep.row("0@1")
        exact = Fraction(row["finite_n_exact"])
        se = math.sqrt(float(target) * (1 - float(target)) / cfg.samples)
        good = exact == target and abs(row["freq"] - float(target)) <= 3 * se
        ok &= good
        parts.append(f"{kind} p={p}: {row['freq']:.5f} vs {target} (z={(row['freq'] - float(target)) / se:+.2f})")
    verdict(2, ok, "; ".join(parts), time.perf_counter() - t0, 60)


def _criterion3_case(p, kind, u):
    n, a, N = 8, 2, 50_000
    cfg = ExperimentConfig(p=p, kind=kind, unit_param=u, n=n, clamp=a, samples=N, seed=30)
    ctx = TheoryContext(cfg.spec(), pairing_count_source="oracle")
    counts = sample_cokernel_types(cfg)
    checks = []
    # exact classes at a = 2 are Gamma = (1^k); P(1^k) <= P(corank k at a=1)
    k = 0
    while True:
        tail = sum(corank_probability(j, n, ctx) for j in range(k, n + 1))
        if tail < Fraction(1, 100):
            break
        gamma = Partition((1,) * k)
        prob = finite_n_haar_probability(gamma, n, ctx)
        if prob >= Fraction(1, 100):
            checks.append((str(Partition(gamma.parts, a)), prob))
        k += 1
    # rank-one types (m), m >= 2, collapse to 2@2: P(2@2) = P(corank 1) - P(Gamma = (1))
    rank_one = corank_probability(1, n, ctx) - finite_n_haar_probability(Partition((1,)), n, ctx)
    if rank_one >= Fraction(1, 100):
        checks.append(("2@2", rank_one))
    results = []
    ok = True
    for label, prob in checks:
        c = counts.get(Partition.parse(label), 0)
        p0 = float(prob)
        se = math.sqrt(p0 * (1 - p0) / N)
        z = (c / N - p0) / se
        ok &= abs(z) <= 3
        results.append(f"{label} z={z:+.2f}")
    return ok, f"{kind} p={p} [{', '.join(results)}]"


def test_3_distribution_convergence(verdict):
    t0 = time.perf_counter()
    ok1, d1 = _criterion3_case(2, "unram", None)
    ok2, d2 = _criterion3_case(3, "ram-odd", 1)
    verdict(3, ok1 and ok2, f"{d1}; {d2}", time.perf_counter() - t0, 300)


def test_4_moments(verdict):
    t0 = time.perf_counter()
    ok = True
    parts = []
    cases = [
        (2, "unram", None, [("1", 2, 0.05), ("1.1", 16, 0.10)]),
        (3, "ram-odd", 1, [("1", 1, 0.05), ("2", 3, 0.10)]),
    ]
    for p, kind, u, targets in cases:
        cfg = ExperimentConfig(p=p, kind=kind, unit_param=u, n=12, clamp=2, samples=100_000, seed=40)
        rep = run_moment_experiment(cfg, [t for t, _, _ in targets])
        for row, (mu, expect, band) in zip(rep.rows, targets):
            good = row["closed_form"] == expect and row["rel_error"] < band
            ok &= good
            parts.append(f"{kind} p={p} mu={mu}: {row['empirical']:.4f} vs {expect} ({100 * row['rel_error']:.2f}% < {100 * band:.0f}%)")
    verdict(4, ok, "; ".join(parts), time.perf_counter() - t0, 300)


def test_5_universality(verdict):
    t0 = time.perf_counter()
    d = EntryDistribution.from_probs([0.7, 0.3])
    cfg = ExperimentConfig(
        p=2, kind="unram", n_ladder=(4, 8, 16), clamp=1, samples=20_000, sampler="eps", dist_y=d, dist_z=d, seed=50
    )
    rep = run_universality_sweep(cfg)
    eps = [r for r in rep.rows if r["sampler"] == "eps"]
    tv4, tv16, se16 = eps[0]["tv"], eps[-1]["tv"], eps[-1]["tv_se"]
    ok = tv16 < tv4 + 2 * se16 and tv16 < 0.06
    ladder = ", ".join(f"n={r['n']}: {r['tv']:.4f}" for r in eps)
    verdict(5, ok, f"eps TV {ladder}; TV(16) < TV(4) + 2SE = {tv4 + 2 * se16:.4f} and < 0.06", time.perf_counter() - t0, 600)


def test_6_parity_law(verdict):
    t0 = time.perf_counter()
    a = 5
    parts = []
    violations = 0
    for p, kind in [(3, "ram-odd"), (2, "ram2-i"), (2, "ram2-ii")]:
        cfg = ExperimentConfig(p=p, kind=kind, unit_param=1, n=6, clamp=a, samples=10_000, seed=60)
        counts = sample_cokernel_types(cfg)
        bad = 0
        for cls, c in counts.items():
            mult = {}
            for x in cls.parts:
                mult[x] = mult.get(x, 0) + 1
            if any(x % 2 == 1 and x < a and m % 2 == 1 for x, m in mult.items()):
                bad += c
        violations += bad
        parts.append(f"{kind} p={p}: {bad} of {sum(counts.values())}")
    verdict(6, violations == 0, "odd parts below the clamp with odd multiplicity: " + "; ".join(parts), time.perf_counter() - t0, 60)


def _aut_check(mu, q):
    """Count automorphisms with the most literal method that fits."""
    if count_hom(mu, mu, q) <= 2**10:
        return "direct", brute_force_automorphisms(mu, q, "direct", budget=2**10)
    if q ** len(mu.parts) <= 2**6:
        return "subspace", brute_force_automorphisms(mu, q, "subspace")
    return "nested", brute_force_automorphisms(mu, q, "nested")


def test_7_oracle_coherence(verdict):
    t0 = time.perf_counter()
    ok = True
    # orbit-stabilizer over all Gamma with |Gamma| <= 2^6
    orbit = 0
    for spec in (make_spec(2, "unram", None, 1), make_spec(3, "ram-odd", 1, 1)):
        for g in partitions_up_to(6):
            if spec.q ** g.size > 2**6:
                continue
            census = pairing_census(g, spec)
            ok &= census.identity_holds()
            orbit += 1
    # automorphisms for |G_mu| <= 2^12
    tiers = {"direct": 0, "subspace": 0, "nested": 0}
    for q in (2, 3, 4):
        for mu in partitions_up_to(12):
            if q**mu.size > 2**12:
                continue
            method, count = _aut_check(mu, q)
            tiers[method] += 1
            ok &= count == count_automorphisms(mu, q)
    # surjections for |G_lam| <= 2^6
    sur = {"direct": 0, "subspace": 0}
    for q in (2, 3, 4):
        for lam in partitions_up_to(6):
            if q**lam.size > 2**6:
                continue
            # a target larger than G_lam admits no surjection
            for mu in partitions_up_to(lam.size + 1):
                if mu.size > lam.size:
                    ok &= count_surjections(lam, mu, q) == 0
            for mu in partitions_up_to(lam.size):
                expect = count_surjections(lam, mu, q)
                if count_hom(lam, mu, q) <= 2**10:
                    got = brute_force_surjections_direct(lam, mu, q)
                    sur["direct"] += 1
                else:
                    got = brute_force_surjections(lam, mu, q, "subspace")
                    sur["subspace"] += 1
                ok &= got == expect
    detail = (
        f"orbit-stabilizer on {orbit} Gamma; automorphisms {sum(tiers.values())} cases {tiers}; "
        f"surjections {sum(sur.values())} pairs {sur}"
    )
    verdict(7, ok, detail, time.perf_counter() - t0, 300)


def test_8_character_identity(verdict):
    t0 = time.perf_counter()
    specs = [
        make_spec(2, "unram", None, 1),
        make_spec(3, "unram", None, 1),
        make_spec(3, "ram-odd", 1, 1),
        make_spec(2, "ram2-i", 1, 1),
        make_spec(2, "ram2-ii", 1, 1),
    ]
    total = bad = 0
    ok = True
    for spec in specs:
        for n in (1, 2):
            checked, wrong, zeros = charsum_exhaustive(spec, n, Partition((1,)))
            total += checked
            bad += wrong
            ok &= checked > 0 and 0 < zeros < checked
    verdict(8, ok and bad == 0, f"{total} (X, F) instances, {bad} disagreements", time.perf_counter() - t0, 60)


def test_9_classifier(verdict):
    t0 = time.perf_counter()
    a = 2
    M = 2 * a + 2
    specs = [
        make_spec(2, "unram", None, M),
        make_spec(3, "unram", None, M),
        make_spec(3, "ram-odd", 1, M),
        make_spec(3, "ram-odd", 2, M),
        make_spec(2, "ram2-i", 1, M),
        make_spec(2, "ram2-ii", 1, M),
    ]
    failures = 0
    total = 0
    for spec in specs:
        rng = np.random.default_rng(90)
        for i in range(1000):
            A = sample_haar(spec, 1 + i % 4, rng)
            Y, form = classify(A)
            good = verify_congruence(A, Y, form)
            good &= cokernel_type(form.materialize(), a) == cokernel_type(A, a)
            if spec.ramified:
                good &= form.block_conditions_hold() and block_cokernels_match(form, a)
            else:
                good &= not form.blocks
            failures += not good
            total += 1
    verdict(9, failures == 0, f"{total} matrices over {len(specs)} specs at M={M}, {failures} failures", time.perf_counter() - t0, 300)
