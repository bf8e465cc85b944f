"""Numba kernels for dynamic distances and greedy separated sets.

States are addressed through coordinate *streams*: a stream is a row of a
coordinate table plus an offset, and its value at time t is
``table[row, offset + t]``. A state has ``r`` elements of ``dim`` streams each.

Greedy candidates are found through 1-Lipschitz sketches (one scalar stream
per sketch). Two states at dynamic distance < eps have sketch values within
eps at every time, so they fall in the same or adjacent buckets of width
eps. Every candidate is then verified with the exact distance.
"""
from __future__ import annotations

import numpy as np
from numba import njit

KIND_POINT = 0
KIND_SET = 1
KIND_SUSP = 2
HALF_WINDOW = 8


@njit(cache=True, inline="always")
def _stream_dist(table, wrap, r1, o1, r2, o2, t):
    d = abs(table[r1, o1 + t] - table[r2, o2 + t])
    if wrap[r1]:
        d = d % 1.0
        if d > 0.5:
            d = 1.0 - d
    return d


@njit(cache=True)
def _elem_dist(table, wrap, refs, i, c, j, e, t):
    dim = refs.shape[2]
    m = 0.0
    for k in range(dim):
        d = _stream_dist(table, wrap, refs[i, c, k, 0], refs[i, c, k, 1],
                         refs[j, e, k, 0], refs[j, e, k, 1], t)
        if d > m:
            m = d
    return m


@njit(cache=True)
def state_dist(kind, table, wrap, refs, radius, coll, i, j, t):
    """Distance between states i and j at time t."""
    r = refs.shape[1]
    if kind == KIND_SUSP:
        if coll[i] and coll[j]:
            return 0.0
        if coll[i]:
            return radius[j, t]
        if coll[j]:
            return radius[i, t]
    if kind == KIND_POINT:
        m = 0.0
        for c in range(r):
            d = _elem_dist(table, wrap, refs, i, c, j, c, t)
            if d > m:
                m = d
        return m
    h = 0.0
    for c in range(r):
        best = np.inf
        for e in range(r):
            d = _elem_dist(table, wrap, refs, i, c, j, e, t)
            if d < best:
                best = d
        if best > h:
            h = best
    for e in range(r):
        best = np.inf
        for c in range(r):
            d = _elem_dist(table, wrap, refs, i, c, j, e, t)
            if d < best:
                best = d
        if best > h:
            h = best
    if kind == KIND_SUSP:
        via = radius[i, t] + radius[j, t]
        if via < h:
            h = via
    return h


@njit(cache=True)
def dyn_dist(kind, table, wrap, refs, radius, coll, i, j, n):
    m = 0.0
    for t in range(n):
        d = state_dist(kind, table, wrap, refs, radius, coll, i, j, t)
        if d > m:
            m = d
    return m


@njit(cache=True)
def _is_close_point(table, wrap, refs, i, j, n, eps):
    # product metric: close iff every coordinate stream pair stays within eps
    for c in range(refs.shape[1]):
        for k in range(refs.shape[2]):
            r1 = refs[i, c, k, 0]
            o1 = refs[i, c, k, 1]
            r2 = refs[j, c, k, 0]
            o2 = refs[j, c, k, 1]
            if wrap[r1]:
                for t in range(n):
                    d = abs(table[r1, o1 + t] - table[r2, o2 + t]) % 1.0
                    if d >= eps and 1.0 - d >= eps:
                        return False
            else:
                for t in range(n):
                    if abs(table[r1, o1 + t] - table[r2, o2 + t]) >= eps:
                        return False
    return True


@njit(cache=True)
def _elem_close(table, wrap, refs, i, c, j, e, t, eps):
    for k in range(refs.shape[2]):
        r1 = refs[i, c, k, 0]
        d = abs(table[r1, refs[i, c, k, 1] + t] - table[refs[j, e, k, 0], refs[j, e, k, 1] + t])
        if wrap[r1]:
            d = d % 1.0
            if d > 0.5:
                d = 1.0 - d
        if d >= eps:
            return False
    return True


@njit(cache=True)
def _hausdorff_close(table, wrap, refs, i, j, t, eps):
    # d_H(A, B) < eps iff every element of each set has a partner within eps
    r = refs.shape[1]
    for c in range(r):
        found = False
        for e in range(r):
            if _elem_close(table, wrap, refs, i, c, j, e, t, eps):
                found = True
                break
        if not found:
            return False
    for e in range(r):
        found = False
        for c in range(r):
            if _elem_close(table, wrap, refs, i, c, j, e, t, eps):
                found = True
                break
        if not found:
            return False
    return True


@njit(cache=True)
def _close_at(kind, table, wrap, refs, radius, coll, i, j, t, eps):
    if kind == KIND_SUSP:
        if coll[i] and coll[j]:
            return True
        if coll[i]:
            return radius[j, t] < eps
        if coll[j]:
            return radius[i, t] < eps
        if radius[i, t] + radius[j, t] < eps:
            return True
    return _hausdorff_close(table, wrap, refs, i, j, t, eps)


@njit(cache=True)
def _is_close(kind, table, wrap, refs, radius, coll, i, j, n, eps, t0):
    # True iff d_n(i, j) < eps. Orbits that share a bucket at t0 tend to
    # separate near t0, so that window is checked before the full scan.
    if kind == KIND_POINT:
        return _is_close_point(table, wrap, refs, i, j, n, eps)
    lo = max(0, t0 - HALF_WINDOW)
    hi = min(n, t0 + HALF_WINDOW + 1)
    for t in range(lo, hi):
        if not _close_at(kind, table, wrap, refs, radius, coll, i, j, t, eps):
            return False
    for t in range(n):
        if lo <= t < hi:
            continue
        if not _close_at(kind, table, wrap, refs, radius, coll, i, j, t, eps):
            return False
    return True


@njit(cache=True)
def _bucket(s, w, nb, wrapped):
    b = int(s / w)
    if b < 0:
        b = 0
    if wrapped:
        if b > nb - 1:
            b = nb - 1
    elif b > nb - 2:
        b = nb - 2
    return b


@njit(cache=True, nogil=True)
def greedy_kernel(kind, table, wrap, refs, radius, coll,
                  sk_table, sk_wrap, sk_refs, peak, order, n, eps):
    """Greedy maximal (n, eps)-separated subset, scanning states in ``order``.

    ``peak[i]`` is the time where state i moves most; the bucket search starts
    there because that is where its neighbourhood is least crowded. Any
    bucket gives an exact answer, the search only looks for a small one.
    Returns the kept state indices in the order they were accepted.
    """
    M = order.shape[0]
    F = sk_refs.shape[1]
    w = eps * (1.0 + 1e-9)
    nb = int(1.0 / w) + 3          # plain buckets cover sketch values in [0, 1]
    nbw = max(1, int(1.0 / w))     # wrapped buckets; the last one is wider
    head = np.full((F, n, nb), -1, np.int64)
    cnt = np.zeros((F, n, nb), np.int64)
    slot = F * n
    nxt = np.empty(M * slot, np.int64)
    kept = np.empty(M, np.int64)
    nk = 0
    nbr = np.empty(3, np.int64)
    for ii in range(M):
        i = order[ii]
        best = -1
        bf = 0
        bt = 0
        t0 = min(peak[i], n - 1)
        for f in range(F):
            rr = sk_refs[i, f, 0]
            oo = sk_refs[i, f, 1]
            wr = sk_wrap[rr]
            lim = nbw if wr else nb
            for q in range(n):
                t = t0 + q
                if t >= n:
                    t -= n
                b = _bucket(sk_table[rr, oo + t], w, lim, wr)
                c = cnt[f, t, b]
                if wr:
                    if nbw >= 3:
                        c += cnt[f, t, (b - 1) % nbw] + cnt[f, t, (b + 1) % nbw]
                    elif nbw == 2:
                        c += cnt[f, t, 1 - b]
                else:
                    c += cnt[f, t, b + 1]
                    if b > 0:
                        c += cnt[f, t, b - 1]
                if best < 0 or c < best:
                    best = c
                    bf = f
                    bt = t
                    if c <= 1:
                        break
            if best <= 1:
                break
        close = False
        if best > 0:
            rr = sk_refs[i, bf, 0]
            oo = sk_refs[i, bf, 1]
            wr = sk_wrap[rr]
            b = _bucket(sk_table[rr, oo + bt], w, nbw if wr else nb, wr)
            k = 0
            nbr[k] = b
            k += 1
            if wr:
                if nbw >= 2:
                    nbr[k] = (b + 1) % nbw
                    k += 1
                if nbw >= 3:
                    nbr[k] = (b - 1) % nbw
                    k += 1
            else:
                nbr[k] = b + 1
                k += 1
                if b > 0:
                    nbr[k] = b - 1
                    k += 1
            for q in range(k):
                node = head[bf, bt, nbr[q]]
                while node >= 0:
                    j = kept[node // slot]
                    if _is_close(kind, table, wrap, refs, radius, coll, i, j, n, eps, bt):
                        close = True
                        break
                    node = nxt[node]
                if close:
                    break
        if close:
            continue
        kept[nk] = i
        base = nk * slot
        for f in range(F):
            rr = sk_refs[i, f, 0]
            oo = sk_refs[i, f, 1]
            wr = sk_wrap[rr]
            lim = nbw if wr else nb
            for t in range(n):
                b = _bucket(sk_table[rr, oo + t], w, lim, wr)
                node = base + f * n + t
                nxt[node] = head[f, t, b]
                head[f, t, b] = node
                cnt[f, t, b] += 1
        nk += 1
    return kept[:nk].copy()


@njit(cache=True)
def pair_matrix(kind, table, wrap, refs, radius, coll, n):
    """Full d_n matrix; only for small clouds (tests and exhaustive oracles)."""
    M = refs.shape[0]
    out = np.zeros((M, M))
    for i in range(M):
        for j in range(i + 1, M):
            d = dyn_dist(kind, table, wrap, refs, radius, coll, i, j, n)
            out[i, j] = d
            out[j, i] = d
    return out
