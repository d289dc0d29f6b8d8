"""Compiled inner loops.  Every parallel loop writes disjoint cells only, so
results do not depend on the thread count."""

import numba
import numpy as np
from numba import njit, prange

# The bundled TBB is often too old; prefer layers that need no extra runtime.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

INF = np.int64(1) << np.int64(60)

_CHUNK = 4096


@njit(cache=True, inline="always")
def _identifies(x, masks, buf):
    # Nonempty, pairwise distinct code intersections for every middle vertex.
    for i in range(masks.shape[0]):
        y = masks[i] & x
        if y == 0:
            return False
        for j in range(i):
            if buf[j] == y:
                return False
        buf[i] = y
    return True


@njit(parallel=True, cache=True)
def barcode_flags(nbits, masks):
    total = np.int64(1) << np.int64(nbits)
    flags = np.zeros(total, dtype=np.uint8)
    nchunks = (total + _CHUNK - 1) // _CHUNK
    for ch in prange(nchunks):
        buf = np.empty(masks.shape[0], dtype=np.int64)
        hi = min(total, (ch + 1) * _CHUNK)
        for x in range(ch * _CHUNK, hi):
            if _identifies(x, masks, buf):
                flags[x] = 1
    return flags


@njit(parallel=True, cache=True)
def extension_targets(encodings, lookup, masks5, k):
    """Target index for every (vertex, appended column) slot.

    -1: the 5-bar is not a barcode; -2: it is, but its last four columns are
    not a known vertex (should never happen).
    """
    n = encodings.shape[0]
    fan = 1 << k
    shift = 4 * k
    out = np.full(n * fan, -1, dtype=np.int32)
    nchunks = (n + 255) // 256
    for ch in prange(nchunks):
        buf = np.empty(masks5.shape[0], dtype=np.int64)
        hi = min(n, (ch + 1) * 256)
        for i in range(ch * 256, hi):
            p = encodings[i]
            for c in range(fan):
                q = p | (np.int64(c) << shift)
                if _identifies(q, masks5, buf):
                    j = lookup[q >> k]
                    out[i * fan + c] = j if j >= 0 else -2
    return out


@njit(parallel=True, cache=True)
def _relax(indptr, src, w, prev, nxt, pred, record, inf):
    n = nxt.shape[0]
    for v in prange(n):
        best = inf
        bu = -1
        for e in range(indptr[v], indptr[v + 1]):
            u = src[e]
            fu = prev[u]
            if fu != inf:
                c = fu + w[e]
                if c < best:
                    best = c
                    bu = u
        nxt[v] = best
        if record:
            pred[v] = bu


@njit(parallel=True, cache=True)
def _relax_vw(indptr, src, vw, prev, nxt, pred, record, inf):
    # All edges into v weigh vw[v]: one addition per vertex instead of per edge.
    n = nxt.shape[0]
    for v in prange(n):
        best = inf
        bu = -1
        for e in range(indptr[v], indptr[v + 1]):
            fu = prev[src[e]]
            if fu < best:
                best = fu
                bu = src[e]
        if best != inf:
            best += vw[v]
        nxt[v] = best
        if record:
            pred[v] = bu


@njit(parallel=True, cache=True)
def _track(f, fn, n, k, lam_num, lam_den, seen, inf):
    # Running max of (F_n(v) - F_k(v)) / (n - k), compared by cross-multiplication.
    den = n - k
    for v in prange(f.shape[0]):
        fv = f[v]
        if fv == inf:
            continue
        seen[v] = 1
        if fn[v] == inf:
            continue
        num = np.int64(fn[v]) - np.int64(fv)
        if lam_den[v] == 0 or num * lam_den[v] > lam_num[v] * den:
            lam_num[v] = num
            lam_den[v] = den


@njit(cache=True)
def karp_rounds(indptr, src, w, vw, cur, tmp, first, count, n, fn, lam_num, lam_den, seen,
                preds, rec_from, inf):
    """Advance ``cur`` from F_{first} by ``count`` rounds.

    With ``fn`` nonempty, the lambda table is updated for every round index
    k < n visited before relaxing.  Rounds r >= rec_from store their
    minimizing predecessors in ``preds[r - rec_from]``.  A nonempty ``vw``
    replaces the per-edge weights by per-target weights.  ``inf`` is the
    unreachable sentinel, of the same dtype as ``cur``.
    """
    track = fn.shape[0] > 0
    dummy = np.empty(0, dtype=np.int32)
    a = cur
    b = tmp
    for i in range(count):
        r = first + i
        if track and r < n:
            _track(a, fn, n, r, lam_num, lam_den, seen, inf)
        row = r + 1 - rec_from
        record = rec_from >= 0 and row >= 0
        pred = preds[row] if record else dummy
        if vw.shape[0] > 0:
            _relax_vw(indptr, src, vw, a, b, pred, record, inf)
        else:
            _relax(indptr, src, w, a, b, pred, record, inf)
        a, b = b, a
    if count % 2 == 1:
        cur[:] = tmp
    return 0


@njit(cache=True)
def select_min(lam_num, lam_den):
    best = -1
    for v in range(lam_num.shape[0]):
        if lam_den[v] == 0:
            continue
        if best < 0 or lam_num[v] * lam_den[best] < lam_num[best] * lam_den[v]:
            best = v
    return best


@njit(cache=True)
def has_negative_cycle(indptr, src, w, scale, shift):
    """Bellman-Ford from a virtual source on weights ``w*scale - shift``."""
    n = indptr.shape[0] - 1
    dist = np.zeros(n, dtype=np.int64)
    for _ in range(n + 1):
        changed = False
        for v in range(n):
            dv = dist[v]
            for e in range(indptr[v], indptr[v + 1]):
                cand = dist[src[e]] + np.int64(w[e]) * scale - shift
                if cand < dv:
                    dv = cand
                    changed = True
            dist[v] = dv
        if not changed:
            return False
    return True
