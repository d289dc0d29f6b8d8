"""Minimum cycle mean by Karp's algorithm, in exact integer arithmetic.

``F_k(v)`` is the least weight of a walk with exactly ``k`` edges from the
source to ``v``.  The minimum cycle mean is

    min_v  max_{0 <= k < n}  (F_n(v) - F_k(v)) / (n - k)

The DP runs twice with two rolling buffers: the first pass only produces
``F_n``, the second recomputes ``F_k`` and folds each round into a per-vertex
running maximum kept as a (numerator, denominator) pair.  Predecessors are
stored only for the last ``window`` rounds, which is where the cycle is
read off.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .automaton import numba_threads

INF = int(_kernels.INF)
# Rolling buffers shrink to int32 when every walk weight fits; halves cache traffic.
INT32_LIMIT = 1 << 30
ROUND_CHUNK = 256

ProgressFn = Callable[[str, int, int], None]


class ArithmeticWidthError(OverflowError):
    pass


@dataclass(frozen=True)
class WeightedDigraph:
    """Integer-weighted digraph in incoming CSR form.

    The edges into ``v`` are ``src[indptr[v]:indptr[v+1]]`` with matching
    ``weight`` entries, sorted by source.  ``target_weight``, when given,
    asserts that every edge into ``v`` weighs ``target_weight[v]``; the DP
    then adds it once per vertex.
    """

    n: int
    indptr: np.ndarray
    src: np.ndarray
    weight: np.ndarray
    source: int = 0
    target_weight: Optional[np.ndarray] = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]], source: int = 0):
        """Build from ``(u, v, weight)`` triples."""
        arr = np.array(list(edges), dtype=np.int64).reshape(-1, 3)
        order = np.lexsort((arr[:, 2], arr[:, 0], arr[:, 1]))
        arr = arr[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(arr[:, 1], minlength=n), out=indptr[1:])
        return cls(n, indptr, arr[:, 0].astype(np.int32), arr[:, 2].copy(), source)

    @property
    def m(self) -> int:
        return int(self.src.shape[0])

    def edges(self) -> list[tuple[int, int, int]]:
        out = []
        for v in range(self.n):
            for e in range(self.indptr[v], self.indptr[v + 1]):
                out.append((int(self.src[e]), v, int(self.weight[e])))
        return out

    def edge_weight(self, u: int, v: int) -> int:
        """Least weight among the edges ``u -> v``."""
        lo, hi = int(self.indptr[v]), int(self.indptr[v + 1])
        ws = self.weight[lo:hi][self.src[lo:hi] == u]
        if ws.size == 0:
            raise ValueError(f"{u} -> {v} is not an edge")
        return int(ws.min())


@dataclass
class McmResult:
    numerator: int
    denominator: int
    argmin_vertex: int
    n: int
    lambda_num: Optional[np.ndarray] = field(default=None, repr=False)
    lambda_den: Optional[np.ndarray] = field(default=None, repr=False)
    # Predecessors for rounds n-W+1 .. n, one row per round.
    preds: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def lambda_star(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def window(self) -> int:
        return 0 if self.preds is None else self.preds.shape[0]


@dataclass(frozen=True)
class CycleSolution:
    """Closed walk ``cycle[0] -> cycle[1] -> ... -> cycle[0]``."""

    cycle: tuple[int, ...]
    total_weight: int
    length: int

    @property
    def mean(self) -> Fraction:
        return Fraction(self.total_weight, self.length)


def _check_width(G: WeightedDigraph, scale: int = 1, shift: int = 0, power: int = 2):
    if G.m == 0:
        raise ValueError("graph has no edges")
    wmax = int(np.abs(G.weight).max()) * scale + abs(shift)
    if wmax * (G.n + 1) ** power >= 1 << 62:
        raise ArithmeticWidthError(
            f"weights up to {wmax} on {G.n} vertices overflow 64-bit cross-multiplication")


def _dp_dtype(G: WeightedDigraph):
    wmax = int(np.abs(G.weight).max()) if G.m else 0
    return np.int32 if (G.n + 1) * (wmax + 1) < INT32_LIMIT else np.int64


def _sentinel(dtype):
    return dtype(INT32_LIMIT) if dtype == np.int32 else np.int64(INF)


def _initial(G: WeightedDigraph) -> np.ndarray:
    dtype = _dp_dtype(G)
    f = np.full(G.n, _sentinel(dtype), dtype=dtype)
    f[G.source] = 0
    return f


def _run_rounds(G, f, first, count, fn, lam_num, lam_den, seen, preds, rec_from,
                progress, label):
    tmp = np.empty_like(f)
    inf = _sentinel(f.dtype.type)
    vw = G.target_weight if G.target_weight is not None else np.empty(0)
    vw = vw.astype(f.dtype)
    done = 0
    while done < count:
        step = min(ROUND_CHUNK, count - done)
        _kernels.karp_rounds(G.indptr, G.src, G.weight, vw, f, tmp, first + done, step, G.n,
                             fn.astype(f.dtype, copy=False), lam_num, lam_den, seen, preds,
                             rec_from, inf)
        done += step
        if progress is not None:
            progress(label, first + done, G.n)
    return f


def _forward_pass(G: WeightedDigraph, window: int, progress=None):
    """F_n for every vertex, plus predecessors of the last ``window`` rounds."""
    n = G.n
    window = max(0, min(window, n))
    preds = np.full((max(window, 1), n), -1, dtype=np.int32)
    rec_from = n - window + 1 if window else -1
    empty = np.empty(0, dtype=np.int64)
    f = _run_rounds(G, _initial(G), 0, n, empty, empty, empty,
                    np.empty(0, dtype=np.uint8), preds, rec_from, progress, "pass1")
    return f, (preds if window else None)


def karp_mcm(G: WeightedDigraph, window: int = 0, threads: Optional[int] = None,
             keep_table: bool = False, progress: Optional[ProgressFn] = None) -> McmResult:
    """Exact minimum cycle mean over all cycles reachable from ``G.source``.

    ``window > 0`` additionally records predecessors for the last ``window``
    rounds of the first pass, so :func:`extract_min_cycle` need not rerun it.
    Vertices with no walk of exactly ``n`` edges from the source take no part
    in the minimum.  Ties go to the lowest vertex index.
    """
    _check_width(G)
    n = G.n
    with numba_threads(threads):
        fn, preds = _forward_pass(G, window, progress)
        lam_num = np.zeros(n, dtype=np.int64)
        lam_den = np.zeros(n, dtype=np.int64)
        seen = np.zeros(n, dtype=np.uint8)
        f = _initial(G)
        if n > 1:
            f = _run_rounds(G, f, 0, n - 1, fn, lam_num, lam_den, seen,
                            np.empty((1, 0), dtype=np.int32), -1, progress, "pass2")
        # the last visited round F_{n-1} still needs folding in
        _kernels._track(f, fn, n, n - 1, lam_num, lam_den, seen, _sentinel(f.dtype.type))
    unreached = np.flatnonzero(seen == 0)
    if unreached.size:
        raise ValueError(f"vertex {int(unreached[0])} is unreachable from source {G.source}")
    best = int(_kernels.select_min(lam_num, lam_den))
    if best < 0:
        raise ValueError("graph has no cycle")
    return McmResult(int(lam_num[best]), int(lam_den[best]), best, n,
                     lam_num if keep_table else None,
                     lam_den if keep_table else None, preds)


def _walk_back(preds: np.ndarray, v: int) -> list[int]:
    # preds[-1] belongs to round n; xs[i] is the walk's vertex at round n - i.
    xs = [v]
    for row in range(preds.shape[0] - 1, -1, -1):
        v = int(preds[row, v])
        if v < 0:
            break
        xs.append(v)
    return xs


def _shortest_closed_subwalk(xs: list[int]) -> Optional[tuple[int, ...]]:
    last: dict[int, int] = {}
    best = None
    for i, x in enumerate(xs):
        if x in last:
            p = last[x]
            if best is None or i - p < best[1] - best[0]:
                best = (p, i)
        last[x] = i
    if best is None:
        return None
    p, i = best
    return tuple(xs[j] for j in range(i, p, -1))


def default_window(k: int) -> int:
    return 4 * k + 64


def extract_min_cycle(G: WeightedDigraph, result: Optional[McmResult] = None,
                      window: int = 64, threads: Optional[int] = None,
                      progress: Optional[ProgressFn] = None) -> CycleSolution:
    """A minimum-mean cycle, read off the tail of the optimal length-n walk.

    The shortest closed sub-walk in the recorded window is returned.  If the
    window holds no repeated vertex it is doubled and the forward pass rerun.
    """
    if result is None:
        result = karp_mcm(G, window=window, threads=threads, progress=progress)
    target = result.lambda_star
    v = result.argmin_vertex
    preds = result.preds
    w = max(1, window, result.window)
    while True:
        if preds is None or preds.shape[0] < min(w, G.n):
            with numba_threads(threads):
                _, preds = _forward_pass(G, w, progress)
        cyc = _shortest_closed_subwalk(_walk_back(preds, v))
        if cyc is not None:
            total = sum(G.edge_weight(cyc[j], cyc[(j + 1) % len(cyc)]) for j in range(len(cyc)))
            sol = CycleSolution(cyc, total, len(cyc))
            if sol.mean != target:
                raise AssertionError(f"extracted cycle mean {sol.mean} != minimum {target}")
            return sol
        if w >= G.n:
            raise AssertionError("no repeated vertex in a walk of n edges")
        w = min(2 * w, G.n)


def verify_cycle_mean(G: WeightedDigraph, cycle: Sequence[int]) -> Fraction:
    """Mean weight of the closed walk, recomputed from the edge list."""
    if not cycle:
        raise ValueError("empty cycle")
    total = 0
    for j, u in enumerate(cycle):
        total += G.edge_weight(int(u), int(cycle[(j + 1) % len(cycle)]))
    return Fraction(total, len(cycle))


class Feasibility(str, enum.Enum):
    BELOW = "below"
    TIGHT_OR_ABOVE = "tight-or-above"


def lambda_feasibility_oracle(G: WeightedDigraph, q: Fraction) -> Feasibility:
    """``BELOW`` iff some cycle has mean strictly less than ``q``.

    Decided by negative-cycle detection on the weights ``w*den(q) - num(q)``.
    """
    q = Fraction(q)
    _check_width(G, q.denominator, q.numerator, power=1)
    neg = _kernels.has_negative_cycle(G.indptr, G.src, G.weight,
                                      np.int64(q.denominator), np.int64(q.numerator))
    return Feasibility.BELOW if neg else Feasibility.TIGHT_OR_ABOVE


@dataclass
class Certificate:
    lam: Fraction
    gap: Fraction
    none_below: bool        # no cycle with mean < lam
    some_within_gap: bool   # some cycle has mean < lam + gap
    none_below_lower: bool  # no cycle with mean < lam - gap

    @property
    def tight(self) -> bool:
        return self.none_below and self.some_within_gap and self.none_below_lower


def certify_lambda(G: WeightedDigraph, lam: Fraction, gap: Optional[Fraction] = None) -> Certificate:
    """Two-sided check that ``lam`` is the minimum cycle mean.

    Cycle means have denominators at most ``n``, so a mean other than ``lam``
    is at least ``1/(n*den(lam)) >= 1/n^2`` away from it.  No negative cycle
    at ``lam`` and one at ``lam + gap`` pin the minimum to exactly ``lam``.
    The default gap is ``1/n^2``, widened to ``1/(n*den(lam))`` when the
    scaled weights would not fit in 64 bits.
    """
    lam = Fraction(lam)
    if gap is None:
        gap = Fraction(1, G.n * G.n)
        try:
            _check_width(G, (lam + gap).denominator, (lam + gap).numerator, power=1)
            _check_width(G, (lam - gap).denominator, (lam - gap).numerator, power=1)
        except ArithmeticWidthError:
            gap = Fraction(1, G.n * lam.denominator)
    at = lambda_feasibility_oracle(G, lam)
    above = lambda_feasibility_oracle(G, lam + gap)
    below = lambda_feasibility_oracle(G, lam - gap)
    return Certificate(
        lam,
        gap,
        at is Feasibility.TIGHT_OR_ABOVE,
        above is Feasibility.BELOW,
        below is Feasibility.TIGHT_OR_ABOVE,
    )
