"""Acceptance suite: one test per criterion, summarised as [PASS]/[FAIL] lines at the end of the run."""

import itertools
import random
import time
from fractions import Fraction

import pytest

from helpers import all_paths, example1, example2, fair_coin, random_distribution, valid_random_instances, words
from pattern_waits import (Alphabet, ChainSpec, Pattern, PatternCollection, ScanSpec,
                           check_stationary_restart, evaluate_gf, exact_summary, iid_correlation,
                           penney_search, scan_patterns, scan_probability, simulate, solve_common_head,
                           solve_instance, validate)
from pattern_waits.correlation import iid_correlation_sum, iid_correlation_via_gtilde
from pattern_waits.errors import PatternWaitsError
from pattern_waits.linear_system import determinant_polynomial

F = Fraction
criterion = pytest.mark.criterion

RANDOM_INSTANCES = valid_random_instances(200, seed=2024)


@criterion(1, "Example 1 golden values, exact, under 10 ms")
def test_c01_example1_golden():
    chain, coll = example1()
    solve_instance(chain, coll)
    timings = []
    for _ in range(5):
        start = time.perf_counter()
        sol = solve_instance(chain, coll)
        timings.append(time.perf_counter() - start)
    assert sol.f == {"A": F(1, 10), "B": F(1, 10), "C": F(8, 10)}
    assert sol.F == (F(44, 15), F(44, 15), F(24, 15))
    assert sol.mean_tau == F(127, 15)
    assert min(timings) < 0.010


@criterion(2, "Example 1 generating function matches the closed form at z = 1, 3/2, 2, 5")
@pytest.mark.parametrize("z", [F(1), F(3, 2), F(2), F(5)])
def test_c02_example1_closed_form(z):
    chain, coll = example1()
    expect = (16 * z**2 - 1) / (3 * z * (32 * z**3 - 24 * z**2 - 3))
    assert evaluate_gf(chain, coll, z).f_total == expect


@criterion(3, "Example 1 common-head reduction reproduces the stopping probabilities")
def test_c03_common_head():
    chain, coll = example1()
    assert solve_common_head(chain, coll) == {"A": F(1, 10), "B": F(1, 10), "C": F(8, 10)}


@criterion(4, "Example 2 golden values and the stationary restart property")
def test_c04_example2_golden():
    chain, coll = example2()
    sol = solve_instance(chain, coll)
    assert sol.f == {"A": F(4, 13), "B": F(9, 13)}
    assert sol.F == (F(16, 13), F(16, 13))
    assert sol.mean_tau == F(45, 13)
    report = check_stationary_restart(chain, sol, coll)
    assert report.holds
    assert report.c == F(32, 13)


@criterion(5, "linear system equals the embedding oracle on 200 random instances, under 60 s")
def test_c05_oracle_equivalence():
    start = time.perf_counter()
    for chain, coll in RANDOM_INSTANCES:
        assert chain.size <= 4 and len(coll) <= 3 and all(len(K) <= 4 for K in coll)
        assert all(v.denominator <= 8 for row in chain.transition for v in row)
        sol = solve_instance(chain, coll)
        oracle = exact_summary(chain, coll)
        assert sol.mean_tau == oracle.mean
        assert sol.f == oracle.stop_probs
    assert time.perf_counter() - start < 60


@criterion(6, "generating-function identity at z = 1, 2; f sums to 1; E(tau) = 1 + sum F")
def test_c06_identities():
    for chain, coll in RANDOM_INSTANCES:
        for z in (F(1), F(2)):
            sol = solve_instance(chain, coll, z=z)
            assert (z - 1) * (1 + sum(sol.F)) + z * sum(sol.f.values()) == z
            if z == 1:
                assert sum(sol.f.values()) == 1
                assert sol.mean_tau == 1 + sum(sol.F)


def conway_mean(word):
    # fair coin: E(tau) = sum of 2**r over self-overlaps r
    return sum(2**r for r in range(1, len(word) + 1) if word[-r:] == word[:r])


@criterion(7, "i.i.d. correlation formulas agree; fair coin E(11) = 6 and E(HTH) = 10")
def test_c07_iid_reduction():
    rng = random.Random(77)
    checked = 0
    instances = 0
    while instances < 50:
        m = rng.randint(1, 4)
        mu = random_distribution(rng, m)
        if any(v == 0 for v in mu):
            continue
        alpha = Alphabet(tuple(str(i) for i in range(m)))
        chain = ChainSpec.iid(alpha, mu)
        ws = [[str(rng.randrange(m)) for _ in range(rng.randint(1, 4))] for _ in range(rng.randint(1, 3))]
        coll = PatternCollection.from_words(alpha, ws, names=[f"K{i}" for i in range(len(ws))])
        try:
            validate(chain, coll)
        except PatternWaitsError:
            continue
        instances += 1
        for K, T in itertools.product(coll, repeat=2):
            for z in (F(1), F(3, 2), F(4)):
                direct = iid_correlation_sum(chain, K, T, z)
                assert direct == iid_correlation_via_gtilde(chain, K, T, z)
                assert iid_correlation(chain, K, T, z) == direct
                checked += 1
    assert checked >= 150

    coin = fair_coin()
    for word, expect in (("11", 6), ("101", 10)):
        assert conway_mean(word) == expect
        coll = words(word)
        assert solve_instance(coin, coll).mean_tau == expect
        assert exact_summary(coin, coll).mean == expect


@criterion(8, "Penney reply to 111 is 011 with 7/8, agreeing with the oracle on all candidates")
def test_c08_penney():
    coin = fair_coin()
    report = penney_search(coin, Pattern("111", (1, 1, 1)), 3)
    assert report.best.name == "011"
    assert report.best_prob == F(7, 8)
    assert len(report.candidates) == 7
    for cand, p in report.candidates:
        assert exact_summary(coin, words("111", cand.name)).stop_probs[cand.name] == p


@criterion(9, "scan set for w = 4, k = 2 and P(S_3 >= 2) = 1/2 by enumeration")
def test_c09_scan():
    assert scan_patterns(ScanSpec(4, 2)).names == ["11", "101", "1001"]
    coin = fair_coin()
    brute = sum(p for path, p in all_paths(coin, 3)
                if any(sum(path[i:i + 4]) >= 2 for i in range(3)))
    assert brute == F(1, 2)
    assert scan_probability(coin, ScanSpec(4, 2, 3)) == brute


@criterion(10, "one million simulated trials within 4 standard errors; reruns identical")
def test_c10_simulation():
    chain, coll = example1()
    res = simulate(chain, coll, 10**6, seed=20240601, workers=4)
    assert abs(res.mean - 127 / 15) <= 4 * res.mean_se
    for name, p in {"A": 0.1, "B": 0.1, "C": 0.8}.items():
        assert abs(res.stop_freqs[name] - p) <= 4 * res.stop_se[name]
    again = simulate(chain, coll, 10**6, seed=20240601, workers=1)
    assert repr(again).encode() == repr(res).encode()


def small_determinant_instances(count, seed):
    out = []
    for chain, coll in valid_random_instances(10 * count, seed=seed):
        if chain.size + sum(len(T) for T in coll) <= 12:
            out.append((chain, coll))
        if len(out) == count:
            break
    return out


@criterion(11, "det Q(z) has the predicted degree and leading coefficient on 20 instances")
def test_c11_determinant():
    instances = small_determinant_instances(20, seed=11)
    assert len(instances) == 20
    for chain, coll in instances:
        coeffs = determinant_polynomial(chain, coll)
        m = chain.size
        product = F(1)
        for T in coll:
            for a, b in zip(T.symbols, T.symbols[1:]):
                product *= chain.transition[a][b]
        assert len(coeffs) - 1 == m + sum(len(T) for T in coll)
        assert coeffs[-1] == F((-1) ** (m + len(coll))) / product
