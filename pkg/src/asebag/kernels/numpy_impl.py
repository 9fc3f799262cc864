"""Vectorized pure-numpy kernels.

Fallback backend (``ASE_NUMBA=0``). Semantics contract with ``numba_impl``:

* Isolation trees are built level-synchronously here and depth-first there,
  but per-node randomness is a stateless hash of (tree seed, heap node id),
  so both orders yield the same tree and identical path lengths.
* Every floating-point expression that decides a comparison (split values,
  gini impurities, thresholds, distances) is written with the same operation
  order as the numba version, so the two backends agree bitwise.
* Transcendental adjustments (average-path-length table) are computed once
  by the caller and passed in as a lookup table; kernels only index it.

Flat tree encoding: ``feature[slot] == -1`` marks a leaf; internal nodes
carry threshold and left/right child slots; ``size[slot]`` is the number of
build samples that reached the node.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_SALT_FEATURE = _U64(1)
_SALT_VALUE = _U64(2)


def _node_u01(seed: np.uint64, heap: np.ndarray, salt: np.uint64) -> np.ndarray:
    """Hash (seed, node id, salt) to a float64 in [0, 1). Vectorized over nodes."""
    with np.errstate(over="ignore"):
        z = heap * _GOLDEN + salt * _MIX2
        z = z ^ seed
        z = z + _GOLDEN
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        z = z ^ (z >> _U64(31))
    return (z >> _U64(11)).astype(np.float64) * _INV53


def _build_one_tree(Xs, height_limit, seed, feat, thr, left, right, size):
    """Level-synchronous isolation-tree build over the subsample `Xs`.

    Writes into the caller-provided per-tree slot arrays; returns node count.
    """
    m, d = Xs.shape
    heap = np.zeros(2 * m, dtype=np.uint64)
    heap[0] = 1
    assign = np.zeros(m, dtype=np.int64)
    n_nodes = 1
    level = np.zeros(1, dtype=np.int64)
    depth = 0
    while level.size:
        counts = np.bincount(assign, minlength=n_nodes)
        size[level] = counts[level]
        splittable = (counts[level] > 1) & (depth < height_limit)
        cand = level[splittable]
        if cand.size == 0:
            break
        P = cand.size
        slot_pos = np.full(n_nodes, -1, dtype=np.int64)
        slot_pos[cand] = np.arange(P)
        pos_of_sample = slot_pos[assign]
        samp_idx = np.nonzero(pos_of_sample >= 0)[0]
        samp_pos = pos_of_sample[samp_idx]

        # Random feature, falling back to the next index while constant.
        f0 = (_node_u01(seed, heap[cand], _SALT_FEATURE) * d).astype(np.int64)
        chosen = np.full(P, -1, dtype=np.int64)
        mn = np.zeros(P)
        mx = np.zeros(P)
        for trial in range(d):
            pending = chosen < 0
            if not pending.any():
                break
            f_try = (f0 + trial) % d
            keep = pending[samp_pos]
            si = samp_idx[keep]
            sp = samp_pos[keep]
            vals = Xs[si, f_try[sp]]
            tmn = np.full(P, np.inf)
            tmx = np.full(P, -np.inf)
            np.minimum.at(tmn, sp, vals)
            np.maximum.at(tmx, sp, vals)
            ok = pending & (tmn < tmx)
            chosen[ok] = f_try[ok]
            mn[ok] = tmn[ok]
            mx[ok] = tmx[ok]

        has_split = chosen >= 0
        # Split value strictly inside (mn, mx); adjacent floats force a leaf.
        u = _node_u01(seed, heap[cand], _SALT_VALUE)
        v = mn + u * (mx - mn)
        v = np.where(v <= mn, np.nextafter(mn, mx), v)
        v = np.where(v >= mx, np.nextafter(mx, mn), v)
        has_split &= v > mn

        snodes = cand[has_split]
        S = snodes.size
        if S == 0:
            break
        lslot = n_nodes + 2 * np.arange(S, dtype=np.int64)
        rslot = lslot + 1
        feat[snodes] = chosen[has_split]
        thr[snodes] = v[has_split]
        left[snodes] = lslot
        right[snodes] = rslot
        with np.errstate(over="ignore"):
            heap[lslot] = heap[snodes] * _U64(2)
            heap[rslot] = heap[snodes] * _U64(2) + _U64(1)
        n_nodes += 2 * S

        split_pos = np.full(P, -1, dtype=np.int64)
        split_pos[has_split] = np.arange(S)
        sp2 = split_pos[samp_pos]
        moving = sp2 >= 0
        mi = samp_idx[moving]
        mp = sp2[moving]
        go_left = Xs[mi, chosen[has_split][mp]] < v[has_split][mp]
        assign[mi] = np.where(go_left, lslot[mp], rslot[mp])

        level = np.concatenate([lslot, rslot])
        depth += 1
    return n_nodes


def build_iforest(X, sub_idx, height_limit, tree_seeds):
    """Build `T` isolation trees over row subsets of `X`.

    sub_idx: (T, m) subsample row indices per tree.
    Returns packed (T, 2m) slot arrays plus per-tree node counts.
    """
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
    seeds = np.asarray(tree_seeds, dtype=np.uint64)
    for t in range(T):
        counts[t] = _build_one_tree(
            X[sub_idx[t]], height_limit, seeds[t],
            features[t], thresholds[t], lefts[t], rights[t], sizes[t],
        )
    return features, thresholds, lefts, rights, sizes, counts


def iforest_depth_sum(features, thresholds, lefts, rights, sizes, adjust, X):
    """Sum over trees of (path depth + adjust[leaf size]) for every row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    T = features.shape[0]
    total = np.zeros(n)
    rows_all = np.arange(n)
    for t in range(T):
        cur = np.zeros(n, dtype=np.int64)
        depth = np.zeros(n)
        active = features[t, cur] >= 0
        while active.any():
            rows = rows_all[active]
            slots = cur[rows]
            f = features[t, slots]
            go_left = X[rows, f] < thresholds[t, slots]
            nxt = np.where(go_left, lefts[t, slots], rights[t, slots])
            cur[rows] = nxt
            depth[rows] += 1.0
            active[rows] = features[t, nxt] >= 0
        total += depth + adjust[sizes[t, cur]]
    return total


def cart_build(X, y, max_depth):
    """Greedy CART on numeric features, minimizing weighted gini impurity.

    Ties in impurity break to the lowest feature index, then the lowest
    threshold. Zero-gain splits are taken (the children may become separable
    deeper down). Leaves store the positive-class fraction.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, d = X.shape
    feat_l: list[int] = []
    thr_l: list[float] = []
    left_l: list[int] = []
    right_l: list[int] = []
    val_l: list[float] = []

    def rec(idx: np.ndarray, depth: int) -> int:
        slot = len(feat_l)
        feat_l.append(-1)
        thr_l.append(0.0)
        left_l.append(-1)
        right_l.append(-1)
        sz = idx.size
        pos = int(y[idx].sum())
        val_l.append(pos / sz)
        if sz < 2 or pos == 0 or pos == sz or depth >= max_depth:
            return slot
        best_child = np.inf
        best_f = -1
        best_a = 0.0
        best_b = 0.0
        sz_f = float(sz)
        pos_f = float(pos)
        for f in range(d):
            vals = X[idx, f]
            order = np.argsort(vals)
            sv = vals[order]
            boundaries = np.nonzero(sv[:-1] != sv[1:])[0]
            if boundaries.size == 0:
                continue
            cum = np.cumsum(y[idx][order])
            nL = (boundaries + 1).astype(np.float64)
            posL = cum[boundaries].astype(np.float64)
            nR = sz_f - nL
            posR = pos_f - posL
            pL = posL / nL
            qL = (nL - posL) / nL
            gL = 1.0 - pL * pL - qL * qL
            pR = posR / nR
            qR = (nR - posR) / nR
            gR = 1.0 - pR * pR - qR * qR
            child = (nL * gL + nR * gR) / sz_f
            j = int(np.argmin(child))
            if child[j] < best_child:
                best_child = child[j]
                best_f = f
                best_a = sv[boundaries[j]]
                best_b = sv[boundaries[j] + 1]
        if best_f < 0:
            return slot
        t = best_a + 0.5 * (best_b - best_a)
        if t >= best_b:
            t = best_a
        mask = X[idx, best_f] <= t
        feat_l[slot] = best_f
        thr_l[slot] = t
        left_l[slot] = rec(idx[mask], depth + 1)
        right_l[slot] = rec(idx[~mask], depth + 1)
        return slot

    rec(np.arange(n, dtype=np.int64), 0)
    return (
        np.asarray(feat_l, dtype=np.int64),
        np.asarray(thr_l, dtype=np.float64),
        np.asarray(left_l, dtype=np.int64),
        np.asarray(right_l, dtype=np.int64),
        np.asarray(val_l, dtype=np.float64),
    )


def cart_apply(features, thresholds, lefts, rights, values, X):
    """Leaf value (positive fraction) reached by every row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    cur = np.zeros(n, dtype=np.int64)
    rows_all = np.arange(n)
    active = features[cur] >= 0
    while active.any():
        rows = rows_all[active]
        slots = cur[rows]
        go_left = X[rows, features[slots]] <= thresholds[slots]
        nxt = np.where(go_left, lefts[slots], rights[slots])
        cur[rows] = nxt
        active[rows] = features[nxt] >= 0
    return values[cur]


def kth_neighbor_distances(X_train, X_query, k, exclude_self):
    """Euclidean distance to the k-th nearest training row, per query row.

    With exclude_self=True, query row i must be training row i (the diagonal
    is masked). Brute force, O(n_query * n_train * dim).
    """
    Xt = np.ascontiguousarray(X_train, dtype=np.float64)
    Xq = np.ascontiguousarray(X_query, dtype=np.float64)
    nq = Xq.shape[0]
    nt, d = Xt.shape
    out = np.empty(nq)
    chunk = max(1, min(nq, 8_000_000 // max(nt, 1)))
    for start in range(0, nq, chunk):
        stop = min(start + chunk, nq)
        d2 = np.zeros((stop - start, nt))
        for c in range(d):
            diff = Xq[start:stop, c, None] - Xt[None, :, c]
            d2 += diff * diff
        if exclude_self:
            rows = np.arange(stop - start)
            d2[rows, rows + start] = np.inf
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
        out[start:stop] = np.sqrt(kth)
    return out
