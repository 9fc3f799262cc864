"""Numba-compiled kernels (default backend).

Loop-style twins of ``numpy_impl``; see that module for the shared contract.
Node randomness is keyed by hashed (tree seed, heap node id) pairs, and all
comparison-deciding float expressions mirror the numpy versions operation by
operation, so both backends produce identical models.

First import in a fresh environment pays a one-time JIT compilation cost;
``cache=True`` persists the compiled kernels on disk.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND = "numba"

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0
_SALT_FEATURE = _U64(1)
_SALT_VALUE = _U64(2)


@njit(cache=True, nogil=True)
def _node_u01(seed, heap, salt):
    z = heap * _GOLDEN + salt * _MIX2
    z = z ^ seed
    z = z + _GOLDEN
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    z = z ^ (z >> _U64(31))
    return (z >> _U64(11)) * _INV53


@njit(cache=True, nogil=True)
def _build_forest(X, sub_idx, height_limit, seeds, features, thresholds, lefts, rights, sizes, counts):
    T, m = sub_idx.shape
    d = X.shape[1]
    idx = np.empty(m, dtype=np.int64)
    cap = 2 * m + 4
    st_lo = np.empty(cap, dtype=np.int64)
    st_hi = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_heap = np.empty(cap, dtype=np.uint64)
    st_slot = np.empty(cap, dtype=np.int64)
    for t in range(T):
        seed = seeds[t]
        for i in range(m):
            idx[i] = sub_idx[t, i]
        n_nodes = 1
        top = 0
        st_lo[0] = 0
        st_hi[0] = m
        st_depth[0] = 0
        st_heap[0] = _U64(1)
        st_slot[0] = 0
        top = 1
        while top > 0:
            top -= 1
            lo = st_lo[top]
            hi = st_hi[top]
            depth = st_depth[top]
            heap = st_heap[top]
            slot = st_slot[top]
            sz = hi - lo
            sizes[t, slot] = sz
            if sz <= 1 or depth >= height_limit:
                continue
            # random feature, falling back to the next index while constant
            f0 = int(_node_u01(seed, heap, _SALT_FEATURE) * d)
            chosen = -1
            mn = 0.0
            mx = 0.0
            for trial in range(d):
                f = (f0 + trial) % d
                tmn = X[idx[lo], f]
                tmx = tmn
                for i in range(lo + 1, hi):
                    v = X[idx[i], f]
                    if v < tmn:
                        tmn = v
                    elif v > tmx:
                        tmx = v
                if tmn < tmx:
                    chosen = f
                    mn = tmn
                    mx = tmx
                    break
            if chosen < 0:
                continue
            u = _node_u01(seed, heap, _SALT_VALUE)
            v = mn + u * (mx - mn)
            if v <= mn:
                v = np.nextafter(mn, mx)
            if v >= mx:
                v = np.nextafter(mx, mn)
            if v <= mn:
                continue
            i = lo
            j = hi - 1
            while i <= j:
                if X[idx[i], chosen] < v:
                    i += 1
                else:
                    tmp = idx[i]
                    idx[i] = idx[j]
                    idx[j] = tmp
                    j -= 1
            mid = i
            lslot = n_nodes
            rslot = n_nodes + 1
            n_nodes += 2
            features[t, slot] = chosen
            thresholds[t, slot] = v
            lefts[t, slot] = lslot
            rights[t, slot] = rslot
            st_lo[top] = lo
            st_hi[top] = mid
            st_depth[top] = depth + 1
            st_heap[top] = heap + heap
            st_slot[top] = lslot
            top += 1
            st_lo[top] = mid
            st_hi[top] = hi
            st_depth[top] = depth + 1
            st_heap[top] = heap + heap + _U64(1)
            st_slot[top] = rslot
            top += 1
        counts[t] = n_nodes


def build_iforest(X, sub_idx, height_limit, tree_seeds):
    """Build `T` isolation trees over row subsets of `X`; packed slot arrays."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    sub_idx = np.ascontiguousarray(sub_idx, dtype=np.int64)
    T, m = sub_idx.shape
    maxn = 2 * m
    features = np.full((T, maxn), -1, dtype=np.int64)
    thresholds = np.zeros((T, maxn), dtype=np.float64)
    lefts = np.full((T, maxn), -1, dtype=np.int64)
    rights = np.full((T, maxn), -1, dtype=np.int64)
    sizes = np.zeros((T, maxn), dtype=np.int64)
    counts = np.zeros(T, dtype=np.int64)
    seeds = np.ascontiguousarray(tree_seeds, dtype=np.uint64)
    _build_forest(X, sub_idx, np.int64(height_limit), seeds,
                  features, thresholds, lefts, rights, sizes, counts)
    return features, thresholds, lefts, rights, sizes, counts


@njit(cache=True, nogil=True)
def _depth_sum(features, thresholds, lefts, rights, sizes, adjust, X):
    n = X.shape[0]
    T = features.shape[0]
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for t in range(T):
            slot = 0
            depth = 0.0
            while features[t, slot] >= 0:
                if X[i, features[t, slot]] < thresholds[t, slot]:
                    slot = lefts[t, slot]
                else:
                    slot = rights[t, slot]
                depth += 1.0
            acc += depth + adjust[sizes[t, slot]]
        out[i] = acc
    return out


def iforest_depth_sum(features, thresholds, lefts, rights, sizes, adjust, X):
    """Sum over trees of (path depth + adjust[leaf size]) for every row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _depth_sum(features, thresholds, lefts, rights, sizes,
                      np.ascontiguousarray(adjust, dtype=np.float64), X)


@njit(cache=True, nogil=True)
def _cart_build(X, y, max_depth, features, thresholds, lefts, rights, values):
    n, d = X.shape
    idx = np.arange(n)
    cap = 2 * n + 4
    st_lo = np.empty(cap, dtype=np.int64)
    st_hi = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_parent = np.empty(cap, dtype=np.int64)
    st_side = np.empty(cap, dtype=np.int64)
    st_lo[0] = 0
    st_hi[0] = n
    st_depth[0] = 0
    st_parent[0] = -1
    st_side[0] = 0
    top = 1
    n_nodes = 0
    sv = np.empty(n)
    sy = np.empty(n, dtype=np.int64)
    vals = np.empty(n)
    while top > 0:
        top -= 1
        lo = st_lo[top]
        hi = st_hi[top]
        depth = st_depth[top]
        parent = st_parent[top]
        side = st_side[top]
        slot = n_nodes
        n_nodes += 1
        if parent >= 0:
            if side == 0:
                lefts[parent] = slot
            else:
                rights[parent] = slot
        sz = hi - lo
        pos = 0
        for i in range(lo, hi):
            pos += y[idx[i]]
        values[slot] = pos / sz
        if sz < 2 or pos == 0 or pos == sz or depth >= max_depth:
            continue
        sz_f = float(sz)
        pos_f = float(pos)
        best_child = np.inf
        best_f = -1
        best_a = 0.0
        best_b = 0.0
        for f in range(d):
            for i in range(sz):
                vals[i] = X[idx[lo + i], f]
            order = np.argsort(vals[:sz])
            for i in range(sz):
                sv[i] = vals[order[i]]
                sy[i] = y[idx[lo + order[i]]]
            run_pos = 0
            for j in range(sz - 1):
                run_pos += sy[j]
                if sv[j] != sv[j + 1]:
                    nL = float(j + 1)
                    posL = float(run_pos)
                    nR = sz_f - nL
                    posR = pos_f - posL
                    pL = posL / nL
                    qL = (nL - posL) / nL
                    gL = 1.0 - pL * pL - qL * qL
                    pR = posR / nR
                    qR = (nR - posR) / nR
                    gR = 1.0 - pR * pR - qR * qR
                    child = (nL * gL + nR * gR) / sz_f
                    if child < best_child:
                        best_child = child
                        best_f = f
                        best_a = sv[j]
                        best_b = sv[j + 1]
        if best_f < 0:
            continue
        thr = best_a + 0.5 * (best_b - best_a)
        if thr >= best_b:
            thr = best_a
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        mid = i
        features[slot] = best_f
        thresholds[slot] = thr
        # push right first so the left child pops next: preorder slot layout
        st_lo[top] = mid
        st_hi[top] = hi
        st_depth[top] = depth + 1
        st_parent[top] = slot
        st_side[top] = 1
        top += 1
        st_lo[top] = lo
        st_hi[top] = mid
        st_depth[top] = depth + 1
        st_parent[top] = slot
        st_side[top] = 0
        top += 1
    return n_nodes


def cart_build(X, y, max_depth):
    """Greedy gini CART; see numpy_impl.cart_build for the exact contract."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n = X.shape[0]
    cap = 2 * n + 4
    features = np.full(cap, -1, dtype=np.int64)
    thresholds = np.zeros(cap, dtype=np.float64)
    lefts = np.full(cap, -1, dtype=np.int64)
    rights = np.full(cap, -1, dtype=np.int64)
    values = np.zeros(cap, dtype=np.float64)
    n_nodes = _cart_build(X, y, np.int64(max_depth),
                          features, thresholds, lefts, rights, values)
    return (features[:n_nodes].copy(), thresholds[:n_nodes].copy(),
            lefts[:n_nodes].copy(), rights[:n_nodes].copy(), values[:n_nodes].copy())


@njit(cache=True, nogil=True)
def _cart_apply(features, thresholds, lefts, rights, values, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        slot = 0
        while features[slot] >= 0:
            if X[i, features[slot]] <= thresholds[slot]:
                slot = lefts[slot]
            else:
                slot = rights[slot]
        out[i] = values[slot]
    return out


def cart_apply(features, thresholds, lefts, rights, values, X):
    """Leaf value (positive fraction) reached by every row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _cart_apply(features, thresholds, lefts, rights, values, X)


@njit(cache=True, nogil=True)
def _kth_dist(Xt, Xq, k, exclude_self):
    nq = Xq.shape[0]
    nt, d = Xt.shape
    out = np.empty(nq)
    buf = np.empty(k)
    for q in range(nq):
        for i in range(k):
            buf[i] = np.inf
        for j in range(nt):
            if exclude_self and j == q:
                continue
            d2 = 0.0
            for c in range(d):
                diff = Xq[q, c] - Xt[j, c]
                d2 += diff * diff
            if d2 < buf[k - 1]:
                pos = k - 1
                while pos > 0 and buf[pos - 1] > d2:
                    buf[pos] = buf[pos - 1]
                    pos -= 1
                buf[pos] = d2
        out[q] = np.sqrt(buf[k - 1])
    return out


def kth_neighbor_distances(X_train, X_query, k, exclude_self):
    """Euclidean distance to the k-th nearest training row, per query row."""
    Xt = np.ascontiguousarray(X_train, dtype=np.float64)
    Xq = np.ascontiguousarray(X_query, dtype=np.float64)
    return _kth_dist(Xt, Xq, int(k), bool(exclude_self))
