"""The barcode transition digraph of a strip.

Vertices are the barcodes of a 4-bar, indexed by ascending packed encoding.
An edge ``P' -> P''`` exists for every 5-bar barcode whose first four columns
are ``P'`` and last four are ``P''``; its weight is the number of code
vertices in the appended column.  Edges are stored by target (incoming CSR),
which is the layout the Karp recurrence reads.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import _kernels
from .core import BarPattern, middle_masks

MAX_K = 8
MEM_BUDGET_ENV = "STRIP_IDCODE_MEM_BUDGET_MB"
DEFAULT_MEM_BUDGET_MB = 2048


class ResourceError(RuntimeError):
    pass


def memory_budget_mb() -> int:
    raw = os.environ.get(MEM_BUDGET_ENV)
    return int(raw) if raw else DEFAULT_MEM_BUDGET_MB


def estimate_memory_mb(k: int) -> float:
    """Worst-case footprint of the materialized automaton, from the size bounds."""
    n = 1 << (4 * k)
    m = 1 << (5 * k)
    # lookup table + encodings, edge slots during construction, final edge arrays
    return (n * 4 + n * 8 + m * 4 + m * (4 + 1 + 2) + n * 8) / 2**20


@contextmanager
def numba_threads(threads: Optional[int]):
    if not threads:
        yield
        return
    old = numba.get_num_threads()
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(old)


def _check_k(k: int, max_k: int = MAX_K):
    if not 1 <= k <= max_k:
        raise ResourceError(f"k={k} outside supported range 1..{max_k}")


def enumerate_barcodes(k: int, l: int, threads: Optional[int] = None) -> np.ndarray:
    """Packed encodings of all ``l``-bar barcodes (``l`` in {4, 5}), ascending."""
    _check_k(k)
    if l not in (4, 5):
        raise ValueError(f"bar length must be 4 or 5, got {l}")
    if k * l > 32:
        raise ResourceError(f"enumerating 2^{k * l} subsets of a {l}-bar is out of reach")
    masks = np.array(middle_masks(k, l), dtype=np.int64)
    with numba_threads(threads):
        flags = _kernels.barcode_flags(k * l, masks)
    return np.flatnonzero(flags).astype(np.int64)


@dataclass(frozen=True)
class StripAutomaton:
    k: int
    encodings: np.ndarray  # int64[n], packed 4-bar barcodes
    indptr: np.ndarray     # int64[n+1], incoming CSR
    src: np.ndarray        # int32[m]
    weight: np.ndarray     # uint8[m]
    mask: np.ndarray       # uint16[m], appended column
    source_vertex: int

    @property
    def n(self) -> int:
        return int(self.encodings.shape[0])

    @property
    def m(self) -> int:
        return int(self.src.shape[0])

    def pattern(self, v: int) -> BarPattern:
        return BarPattern.decode(self.k, 4, int(self.encodings[v]))

    def index_of(self, encoding: int) -> int:
        i = int(np.searchsorted(self.encodings, encoding))
        if i == self.n or int(self.encodings[i]) != encoding:
            raise KeyError(f"{encoding:#x} is not a barcode for k={self.k}")
        return i

    def incoming(self, v: int) -> list[tuple[int, int, int]]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [(int(u), int(w), int(c))
                for u, w, c in zip(self.src[lo:hi], self.weight[lo:hi], self.mask[lo:hi])]

    def targets(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int32), np.diff(self.indptr))

    def edge(self, u: int, v: int) -> Optional[tuple[int, int]]:
        """``(weight, mask)`` of the edge ``u -> v`` if present."""
        lo, hi = int(self.indptr[v]), int(self.indptr[v + 1])
        j = lo + int(np.searchsorted(self.src[lo:hi], u))
        if j < hi and int(self.src[j]) == u:
            return int(self.weight[j]), int(self.mask[j])
        return None

    def to_digraph(self):
        from .mcm import WeightedDigraph

        last = (self.encodings >> (3 * self.k)).astype(np.int64)
        vw = np.array([bin(int(c)).count("1") for c in range(1 << self.k)], dtype=np.int64)[last]
        return WeightedDigraph(self.n, self.indptr, self.src, self.weight, self.source_vertex,
                               target_weight=vw)

    def dump(self, fh) -> None:
        for v, (u, w, c) in zip(self.targets(), zip(self.src, self.weight, self.mask)):
            fh.write(f"{u} {v} {w} {c:x}\n")


def build_automaton(k: int, threads: Optional[int] = None, check: bool = True,
                    budget_mb: Optional[int] = None) -> StripAutomaton:
    _check_k(k)
    budget = memory_budget_mb() if budget_mb is None else budget_mb
    need = estimate_memory_mb(k)
    if need > budget:
        raise ResourceError(
            f"k={k}: up to n={1 << 4 * k} vertices and m={1 << 5 * k} edges "
            f"(~{need:.0f} MB) exceed the {budget} MB budget; raise {MEM_BUDGET_ENV} to proceed")

    encodings = enumerate_barcodes(k, 4, threads)
    n = encodings.shape[0]
    lookup = np.full(1 << (4 * k), -1, dtype=np.int32)
    lookup[encodings] = np.arange(n, dtype=np.int32)
    masks5 = np.array(middle_masks(k, 5), dtype=np.int64)
    with numba_threads(threads):
        slots = _kernels.extension_targets(encodings, lookup, masks5, k)
    if (slots == -2).any():
        bad = int(np.flatnonzero(slots == -2)[0])
        raise AssertionError(f"5-bar extension of vertex {bad >> k} restricts to a non-barcode")

    fan = 1 << k
    live = np.flatnonzero(slots >= 0)
    dst = slots[live]
    order = np.argsort(dst, kind="stable")
    live, dst = live[order], dst[order]
    src = (live >> k).astype(np.int32)
    col = (live & (fan - 1)).astype(np.uint16)
    popcount = np.array([bin(c).count("1") for c in range(fan)], dtype=np.uint8)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])

    full = (1 << (4 * k)) - 1
    H = StripAutomaton(k, encodings, indptr, src, popcount[col], col, int(lookup[full]))
    if check:
        check_automaton(H)
    return H


@dataclass
class AutomatonStats:
    k: int
    n: int
    m: int
    min_in_degree: int
    max_in_degree: int
    min_out_degree: int
    max_out_degree: int
    self_loops: int
    strongly_connected: bool
    max_dist_from_source: int
    max_dist_to_source: int

    def as_dict(self) -> dict:
        return asdict(self)


def _distances(H: StripAutomaton, reverse: bool) -> np.ndarray:
    targets = H.targets()
    rows, cols = (targets, H.src) if reverse else (H.src, targets)
    adj = csr_matrix((np.ones(H.m, dtype=np.int8), (rows, cols)), shape=(H.n, H.n))
    return shortest_path(adj, unweighted=True, indices=H.source_vertex)


def automaton_stats(H: StripAutomaton) -> AutomatonStats:
    indeg = np.diff(H.indptr)
    outdeg = np.bincount(H.src, minlength=H.n)
    fwd = _distances(H, reverse=False)
    back = _distances(H, reverse=True)
    connected = bool(np.isfinite(fwd).all() and np.isfinite(back).all())
    return AutomatonStats(
        k=H.k,
        n=H.n,
        m=H.m,
        min_in_degree=int(indeg.min()),
        max_in_degree=int(indeg.max()),
        min_out_degree=int(outdeg.min()),
        max_out_degree=int(outdeg.max()),
        self_loops=int((H.src == H.targets()).sum()),
        strongly_connected=connected,
        max_dist_from_source=int(fwd.max()) if connected else -1,
        max_dist_to_source=int(back.max()) if connected else -1,
    )


def check_automaton(H: StripAutomaton) -> None:
    """Assert the structural facts every automaton must satisfy."""
    k, n, m = H.k, H.n, H.m
    assert n <= 1 << (4 * k) and m <= n << k
    targets = H.targets()
    # Overlap: columns 1..3 of the source are columns 0..2 of the target.
    assert np.array_equal(H.encodings[H.src] >> k, H.encodings[targets] & ((1 << (3 * k)) - 1))
    assert np.array_equal(H.encodings[targets] >> (3 * k), H.mask.astype(np.int64))
    outdeg = np.bincount(H.src, minlength=n)
    assert outdeg.min() >= 1 and outdeg.max() <= 1 << k
    assert np.diff(H.indptr).max() <= 1 << k
    # No parallel edges: incoming lists strictly ascending in source.
    same_target = targets[1:] == targets[:-1]
    assert (H.src[1:][same_target] > H.src[:-1][same_target]).all()
    s = H.source_vertex
    assert H.edge(s, s) == (k, (1 << k) - 1)


def cycle_to_pattern(H: StripAutomaton, cycle: Sequence[int]) -> BarPattern:
    """Periodic pattern read off a closed walk ``v0 -> v1 -> ... -> v0``.

    Column ``j`` is the column appended by the edge ``v_j -> v_{j+1}``.
    """
    if not cycle:
        raise ValueError("empty cycle")
    cols = []
    for j, u in enumerate(cycle):
        v = cycle[(j + 1) % len(cycle)]
        e = H.edge(int(u), int(v))
        if e is None:
            raise ValueError(f"{u} -> {v} is not an edge; not a closed walk")
        cols.append(e[1])
    return BarPattern(H.k, tuple(cols))
