"""Numba kernel for the greedy transmission sort.

Symbols are held in CSR form (indptr/indices over 0-based source indices).
After each pick only the symbols sharing a source index with the picked one
can change score, so an inverted source->symbol index keeps each round
cheap.  The result is identical to the naive full-rescore greedy.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not args or not callable(args[0]) else args[0]


@njit(cache=True)
def _score(indptr, indices, i, rho, one_minus_eps, pre, suf):
    a = indptr[i]
    d = indptr[i + 1] - a
    pre[0] = 1.0
    for t in range(d):
        pre[t + 1] = pre[t] * (1.0 - rho[indices[a + t]])
    suf[d] = 1.0
    for t in range(d - 1, -1, -1):
        suf[t] = suf[t + 1] * (1.0 - rho[indices[a + t]])
    acc = 0.0
    for t in range(d):
        acc += rho[indices[a + t]] * pre[t] * suf[t + 1]
    return one_minus_eps * acc


@njit(cache=True)
def greedy_order(indptr, indices, src_indptr, src_indices, rho, eps, prio, tol):
    """Greedy argmax-score order over all symbols, mutating rho in place.

    Ties within tol are broken by lower degree, then by lower prio value.
    Returns symbol positions in pick order.
    """
    m = indptr.size - 1
    one_minus_eps = 1.0 - eps
    deg = np.empty(m, np.int64)
    maxd = 0
    for i in range(m):
        deg[i] = indptr[i + 1] - indptr[i]
        if deg[i] > maxd:
            maxd = deg[i]
    pre = np.empty(maxd + 1)
    suf = np.empty(maxd + 1)
    tmp = np.empty(maxd)

    score = np.empty(m)
    for i in range(m):
        score[i] = _score(indptr, indices, i, rho, one_minus_eps, pre, suf)

    selected = np.zeros(m, np.bool_)
    stamp = np.full(m, -1, np.int64)
    order = np.empty(m, np.int64)

    for r in range(m):
        best = -1
        for i in range(m):
            if selected[i]:
                continue
            if best == -1:
                best = i
                continue
            si = score[i]
            sb = score[best]
            if si > sb + tol:
                best = i
            elif si >= sb - tol:
                if deg[i] < deg[best] or (deg[i] == deg[best] and prio[i] < prio[best]):
                    best = i
        order[r] = best
        selected[best] = True

        # belief update from the pre-update values
        a = indptr[best]
        d = deg[best]
        pre[0] = 1.0
        for t in range(d):
            pre[t + 1] = pre[t] * (1.0 - rho[indices[a + t]])
        suf[d] = 1.0
        for t in range(d - 1, -1, -1):
            suf[t] = suf[t + 1] * (1.0 - rho[indices[a + t]])
        for t in range(d):
            j = indices[a + t]
            tmp[t] = rho[j] * (1.0 - one_minus_eps * pre[t] * suf[t + 1])
        for t in range(d):
            rho[indices[a + t]] = tmp[t]

        # rescore symbols sharing a neighbor with the pick
        for t in range(d):
            j = indices[a + t]
            for p in range(src_indptr[j], src_indptr[j + 1]):
                s = src_indices[p]
                if selected[s] or stamp[s] == r:
                    continue
                stamp[s] = r
                score[s] = _score(indptr, indices, s, rho, one_minus_eps, pre, suf)

    return order


def build_csr(neighbor_lists, k):
    """CSR over symbols plus the inverted source->symbol CSR."""
    degrees = np.fromiter((len(n) for n in neighbor_lists), np.int64, len(neighbor_lists))
    indptr = np.zeros(len(neighbor_lists) + 1, np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(indptr[-1], np.int64)
    pos = 0
    for n in neighbor_lists:
        for j in n:
            indices[pos] = j - 1
            pos += 1

    counts = np.bincount(indices, minlength=k)
    src_indptr = np.zeros(k + 1, np.int64)
    np.cumsum(counts, out=src_indptr[1:])
    src_indices = np.empty(indptr[-1], np.int64)
    fill = src_indptr[:-1].copy()
    for s in range(len(neighbor_lists)):
        for p in range(indptr[s], indptr[s + 1]):
            j = indices[p]
            src_indices[fill[j]] = s
            fill[j] += 1
    return indptr, indices, src_indptr, src_indices
