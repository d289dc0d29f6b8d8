"""Slow, obviously-correct references used only by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

INF = float("inf")


def karp_full_table(n, edges, source=0):
    """Karp's formula over the full (n+1) x n table of walk weights."""
    into = [[] for _ in range(n)]
    for u, v, w in edges:
        into[v].append((u, w))
    F = [[INF] * n for _ in range(n + 1)]
    F[0][source] = 0
    for k in range(1, n + 1):
        for v in range(n):
            F[k][v] = min((F[k - 1][u] + w for u, w in into[v] if F[k - 1][u] != INF), default=INF)
    best = None
    for v in range(n):
        if F[n][v] == INF:
            continue
        lam = max(Fraction(F[n][v] - F[k][v], n - k) for k in range(n) if F[k][v] != INF)
        if best is None or lam < best:
            best = lam
    return best


def simple_cycles(n, edges):
    """Every simple cycle as a vertex tuple starting at its smallest vertex."""
    out_adj = [[] for _ in range(n)]
    for u, v, w in edges:
        out_adj[u].append((v, w))
    found = []

    def dfs(start, v, path, weight, on_path):
        for x, w in out_adj[v]:
            if x == start:
                found.append((tuple(path), weight + w))
            elif x > start and x not in on_path:
                on_path.add(x)
                path.append(x)
                dfs(start, x, path, weight + w, on_path)
                path.pop()
                on_path.discard(x)

    for s in range(n):
        dfs(s, s, [s], 0, {s})
    return found


def min_cycle_mean_exhaustive(n, edges):
    cycles = simple_cycles(n, edges)
    return min(Fraction(w, len(c)) for c, w in cycles) if cycles else None


def strongly_connected(n, edges):
    fwd = [[] for _ in range(n)]
    back = [[] for _ in range(n)]
    for u, v, _ in edges:
        fwd[u].append(v)
        back[v].append(u)

    def reach(adj):
        seen = {0}
        stack = [0]
        while stack:
            for x in adj[stack.pop()]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return len(seen) == n

    return reach(fwd) and reach(back)


def random_strong_digraph(rng: random.Random, nmax=12, wmax=9):
    """Random strongly connected digraph without parallel edges (rejection sampling)."""
    while True:
        n = rng.randint(1, nmax)
        p = rng.uniform(0.1, 0.6)
        edges = [(u, v, rng.randint(0, wmax))
                 for u, v in itertools.product(range(n), repeat=2) if rng.random() < p]
        if edges and strongly_connected(n, edges):
            return n, edges


# Direct restatement of the barcode definition on vertex sets.
def barcode_by_sets(k, l, code):
    def nb(c, r):
        return {(c + dc, r + dr) for dc, dr in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= c + dc < l and 0 <= r + dr < k}

    middle = [(c, r) for c in range(1, l - 1) for r in range(k)]
    inter = [frozenset(nb(c, r) & code) for c, r in middle]
    return all(inter) and len(set(inter)) == len(inter)


def subsets_of_bar(k, l):
    cells = [(c, r) for c in range(l) for r in range(k)]
    for bits in range(1 << len(cells)):
        # cell index c*k + r matches the packed encoding
        yield bits, {cells[i] for i in range(len(cells)) if bits >> i & 1}
