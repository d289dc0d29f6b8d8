"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the terminal summary.
Run ``pytest tests/test_acceptance.py -v`` to see them; the multi-hour k=5
solve only runs with STRIP_IDCODE_EXTENDED=1.
"""
import os
import random
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pytest

from oracles import karp_full_table, min_cycle_mean_exhaustive, random_strong_digraph
from strip_idcode.automaton import automaton_stats, build_automaton
from strip_idcode.cli import cmd_solve
from strip_idcode.core import (brute_force_min_density, iter_patterns, parse_pattern,
                               pattern_density, verify_periodic_pattern, verify_window_oracle)
from strip_idcode.mcm import (Feasibility, WeightedDigraph, certify_lambda, karp_mcm,
                              lambda_feasibility_oracle)

EXTENDED = os.environ.get("STRIP_IDCODE_EXTENDED") == "1"
K5_FIXTURE = Path(__file__).parent / "data" / "s5_min.txt"
PUBLISHED = {1: Fraction(1, 2), 2: Fraction(3, 7), 3: Fraction(7, 18), 4: Fraction(11, 28),
             5: Fraction(19, 50)}
PERIODS = {1: 2, 2: 7, 3: 12, 4: 14, 5: 10}


@contextmanager
def criterion(log, label):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        if isinstance(exc, pytest.skip.Exception):
            log.append(f"SKIP  {label}: {exc}")
        else:
            log.append(f"FAIL  {label}: {type(exc).__name__}: {exc}".splitlines()[0])
        raise
    log.append(f"PASS  {label} ({time.perf_counter() - t0:.2f}s)")


def progress_to_stderr(label, done, total):
    if done % 4096 == 0:
        print(f"{label} {done}/{total}", file=sys.stderr, flush=True)


@lru_cache(maxsize=None)
def solve(k):
    t0 = time.perf_counter()
    out = cmd_solve(k, certify=k <= 3, progress=progress_to_stderr if k >= 5 else None)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    # compile (or load from cache) every kernel so timings measure the solve
    cmd_solve(1, certify=True)


def check_solve(k, limit):
    out, seconds = solve(k)
    assert out.density == PUBLISHED[k], out.density
    assert out.pattern.length == PERIODS[k], out.pattern.length
    assert verify_periodic_pattern(out.pattern).valid
    assert verify_window_oracle(out.pattern).valid
    assert seconds < limit, f"{seconds:.1f}s >= {limit}s"


def test_c01_k1(acceptance_log):
    with criterion(acceptance_log, "C1  k=1 -> 1/2, length 2, < 1 s"):
        check_solve(1, 1.0)


@pytest.mark.parametrize("k", [2, 3])
def test_c02_k2_k3(acceptance_log, k):
    label = f"C2  k={k} -> {PUBLISHED[k]}, length {PERIODS[k]}, < 60 s"
    with criterion(acceptance_log, label):
        check_solve(k, 60.0)


def test_c03_k4(acceptance_log):
    with criterion(acceptance_log, "C3  k=4 -> 11/28, length 14, < 600 s"):
        check_solve(4, 600.0)


@pytest.mark.extended
def test_c04_k5(acceptance_log):
    with criterion(acceptance_log, "C4  k=5 -> 19/50, length 10 (opt-in)"):
        if not EXTENDED:
            pytest.skip("set STRIP_IDCODE_EXTENDED=1 for the multi-hour k=5 solve")
        check_solve(5, float("inf"))


@pytest.mark.parametrize("k,lmax", [(1, None), (2, 8)])
def test_c05_oracle_equivalence(acceptance_log, k, lmax):
    H = build_automaton(k)
    lmax = lmax or H.n
    with criterion(acceptance_log, f"C5  k={k}: Karp on H_k == brute force, lmax={lmax}"):
        lam = karp_mcm(H.to_digraph()).lambda_star
        d, p = brute_force_min_density(k, lmax)
        assert lam / k == d, (lam / k, d)
        assert verify_window_oracle(p).valid


def test_c06_random_graphs(acceptance_log):
    with criterion(acceptance_log, "C6  500 random strong digraphs, n<=12, w in [0,9]"):
        rng = random.Random(2011)
        for i in range(500):
            n, edges = random_strong_digraph(rng, nmax=12, wmax=9)
            lam = karp_mcm(WeightedDigraph.from_edges(n, edges)).lambda_star
            assert lam == min_cycle_mean_exhaustive(n, edges), (i, n, edges)
            assert lam == karp_full_table(n, edges), (i, n, edges)


def test_c07_verifier_agreement(acceptance_log):
    with criterion(acceptance_log, "C7  verifiers agree on every k=2 pattern, l<=6"):
        bad = [p for l in range(1, 7) for p in iter_patterns(2, l)
               if verify_periodic_pattern(p).valid != verify_window_oracle(p).valid]
        assert not bad, bad[:3]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_c08_structure(acceptance_log, k):
    with criterion(acceptance_log, f"C8  H_{k} structural invariants"):
        H = build_automaton(k)
        s = automaton_stats(H)
        assert H.n <= 2 ** (4 * k)
        assert s.max_in_degree <= 2 ** k and s.max_out_degree <= 2 ** k
        assert s.min_out_degree >= 1
        assert s.strongly_connected
        assert s.max_dist_from_source <= 4 and s.max_dist_to_source <= 4
        for v in range(H.n):
            cols = H.pattern(v).columns
            constant_rows = all(len({(c >> i) & 1 for c in cols}) == 1 for i in range(k))
            assert (H.edge(v, v) is not None) == constant_rows, v


@lru_cache(maxsize=None)
def k5_density():
    """Exact d*(S_5) without the multi-hour solve.

    The frozen pattern gives an upper bound; the absence of any cycle of
    H_5 with mean below 5 times that density gives the matching lower bound.
    """
    if EXTENDED:
        return solve(5)[0].density
    p = parse_pattern(K5_FIXTURE.read_text())
    assert p.k == 5
    assert verify_periodic_pattern(p).valid and verify_window_oracle(p).valid
    d = pattern_density(p)
    G = build_automaton(5).to_digraph()
    assert lambda_feasibility_oracle(G, 5 * d) is Feasibility.TIGHT_OR_ABOVE
    return d


def densities():
    d = {k: solve(k)[0].density for k in range(1, 5)}
    d[5] = k5_density()
    return d


def lower_bound(k):
    return Fraction(7, 20) + Fraction(1, 20 * k)


def upper_bound(k):
    return min(Fraction(2, 5), Fraction(7, 20) + Fraction(3, 10 * k))


@pytest.mark.xfail(strict=True, reason="the published upper bound min(2/5, 7/20 + 3/(10k)) "
                   "is below the exact optima 1/2 (k=1) and 3/7 (k=2)")
def test_c09_literature_bounds(acceptance_log):
    with criterion(acceptance_log, "C9  published two-sided bounds hold for every k<=5"):
        d = densities()
        outside = {k: v for k, v in d.items() if not lower_bound(k) <= v <= upper_bound(k)}
        assert not outside, "outside bounds: " + ", ".join(
            f"k={k} d={v} > {upper_bound(k)}" for k, v in outside.items())


def test_c09_supported_parts(acceptance_log):
    label = "C9' lower bound k<=5, upper bound k=3..5, d(S_4) > d(S_3), d(S_5)"
    with criterion(acceptance_log, label):
        d = densities()
        assert d == PUBLISHED
        assert all(lower_bound(k) <= v for k, v in d.items())
        assert all(d[k] <= upper_bound(k) for k in (3, 4, 5))
        assert d[4] > d[3] and d[4] > d[5]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_c10_certificate(acceptance_log, k):
    label = f"C10 k={k}: no cycle below lambda* or lambda*-1/n^2, one below lambda*+1/n^2"
    with criterion(acceptance_log, label):
        out, _ = solve(k)
        assert out.certified is True
        G = build_automaton(k).to_digraph()
        lam = out.density * k
        c = certify_lambda(G, lam)
        assert c.gap == Fraction(1, G.n ** 2)
        assert c.none_below and c.some_within_gap and c.none_below_lower
