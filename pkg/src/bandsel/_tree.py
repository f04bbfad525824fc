"""Numba kernels for exact CART growth and prediction.

Growth never sorts inside a node: every feature column is argsorted once
per fit, the per-feature sorted index lists are carried through each split
by stable partition, so a split costs O(n_node) per feature. Bootstrap
resampling is handled by expanding samples into instances (one instance
per draw) before building the initial sorted lists.

Feature subsets are drawn per node from a splitmix64 stream seeded per
tree, which keeps ensembles bit-reproducible regardless of thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

UNLIMITED_DEPTH = 1 << 60


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _GAMMA
    z = state[0]
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def _build_sorted_instances(order, offsets, n_inst):
    """Expand globally presorted sample ids into per-feature instance lists."""
    d = order.shape[0]
    n_samples = order.shape[1]
    sorted_idx = np.empty((d, n_inst), np.int32)
    for f in range(d):
        pos = 0
        for k in range(n_samples):
            s = order[f, k]
            for t in range(offsets[s], offsets[s + 1]):
                sorted_idx[f, pos] = np.int32(t)
                pos += 1
    return sorted_idx


@njit(cache=True, nogil=True)
def grow_classification_tree(
    X, y_inst, inst2samp, order, offsets,
    n_classes, max_depth, min_samples_split, m_try, seed,
):
    """Grow one Gini CART over bootstrap instances.

    Returns (feature, threshold, left, right, leaf_class); ``feature`` is -1
    at leaves. Splits maximize the Gini impurity decrease; equal decreases
    resolve to the smaller feature id, then the smaller threshold.
    """
    n_inst = inst2samp.size
    d = X.shape[1]
    sorted_idx = _build_sorted_instances(order, offsets, n_inst)

    cap = 2 * n_inst + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    leaf_class = np.full(cap, -1, np.int64)

    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_inst
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    state = np.empty(1, np.uint64)
    state[0] = seed
    perm = np.empty(d, np.int64)
    counts = np.zeros(n_classes, np.int64)
    lc = np.zeros(n_classes, np.int64)
    rc = np.zeros(n_classes, np.int64)
    scratch = np.empty(n_inst, np.int32)
    goes_left = np.zeros(n_inst, np.uint8)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n = end - start

        for c in range(n_classes):
            counts[c] = 0
        for p in range(start, end):
            counts[y_inst[sorted_idx[0, p]]] += 1
        best_c = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best_c]:
                best_c = c

        if counts[best_c] == n or n < min_samples_split or depth >= max_depth:
            leaf_class[node] = best_c
            continue

        parent_sumsq = 0.0
        for c in range(n_classes):
            parent_sumsq += float(counts[c]) * float(counts[c])
        parent_score = parent_sumsq / n

        for j in range(d):
            perm[j] = j
        for j in range(d - 1, 0, -1):
            r = np.int64(_next_u64(state) % U64(j + 1))
            perm[j], perm[r] = perm[r], perm[j]

        best_gain = 0.0
        best_f = np.int64(-1)
        best_thr = 0.0
        best_nl = 0
        evaluated = 0
        for j in range(d):
            if evaluated >= m_try:
                break
            f = perm[j]
            first_v = X[inst2samp[sorted_idx[f, start]], f]
            last_v = X[inst2samp[sorted_idx[f, end - 1]], f]
            if first_v == last_v:
                continue
            evaluated += 1
            for c in range(n_classes):
                lc[c] = 0
                rc[c] = counts[c]
            sumsq_l = 0.0
            sumsq_r = parent_sumsq
            v_curr = first_v
            for p in range(start, end - 1):
                t = sorted_idx[f, p]
                c = y_inst[t]
                sumsq_l += 2.0 * lc[c] + 1.0
                lc[c] += 1
                sumsq_r -= 2.0 * rc[c] - 1.0
                rc[c] -= 1
                v_next = X[inst2samp[sorted_idx[f, p + 1]], f]
                if v_next > v_curr:
                    n_l = p - start + 1
                    n_r = n - n_l
                    gain = sumsq_l / n_l + sumsq_r / n_r - parent_score
                    if gain > best_gain or (gain == best_gain and best_f >= 0 and f < best_f):
                        thr = 0.5 * (v_curr + v_next)
                        if thr >= v_next:
                            thr = v_curr
                        best_gain = gain
                        best_f = f
                        best_thr = thr
                        best_nl = n_l
                v_curr = v_next

        if best_f < 0:
            leaf_class[node] = best_c
            continue

        for p in range(start, start + best_nl):
            goes_left[sorted_idx[best_f, p]] = 1
        for g in range(d):
            wl = start
            wr = 0
            for p in range(start, end):
                t = sorted_idx[g, p]
                if goes_left[t] == 1:
                    sorted_idx[g, wl] = t
                    wl += 1
                else:
                    scratch[wr] = t
                    wr += 1
            for i in range(wr):
                sorted_idx[g, wl + i] = scratch[i]
        for p in range(start, start + best_nl):
            goes_left[sorted_idx[best_f, p]] = 0

        feature[node] = best_f
        threshold[node] = best_thr
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        stack[top, 0] = rid
        stack[top, 1] = start + best_nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + best_nl
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        leaf_class[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def grow_regression_tree(
    X, grad, hess, order, offsets,
    max_depth, min_samples_split, m_try, seed, leaf_factor,
):
    """Variance-reduction regression tree on gradient targets.

    Leaf values are ``leaf_factor * sum(grad) / sum(hess)`` (0 where the
    hessian mass vanishes), the Newton step used by softmax boosting.
    """
    n_inst = grad.size
    d = X.shape[1]
    inst2samp = np.empty(n_inst, np.int32)
    n_samples = offsets.size - 1
    for s in range(n_samples):
        for t in range(offsets[s], offsets[s + 1]):
            inst2samp[t] = np.int32(s)
    sorted_idx = _build_sorted_instances(order, offsets, n_inst)

    cap = 2 * n_inst + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    leaf_value = np.zeros(cap, np.float64)

    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_inst
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    state = np.empty(1, np.uint64)
    state[0] = seed
    perm = np.empty(d, np.int64)
    scratch = np.empty(n_inst, np.int32)
    goes_left = np.zeros(n_inst, np.uint8)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n = end - start

        g_total = 0.0
        h_total = 0.0
        for p in range(start, end):
            t = sorted_idx[0, p]
            g_total += grad[t]
            h_total += hess[t]

        if n < min_samples_split or depth >= max_depth:
            leaf_value[node] = leaf_factor * g_total / h_total if h_total > 1e-150 else 0.0
            continue

        parent_score = g_total * g_total / n
        min_gain = 1e-12 * (1.0 + abs(parent_score))

        for j in range(d):
            perm[j] = j
        for j in range(d - 1, 0, -1):
            r = np.int64(_next_u64(state) % U64(j + 1))
            perm[j], perm[r] = perm[r], perm[j]

        best_gain = min_gain
        best_f = np.int64(-1)
        best_thr = 0.0
        best_nl = 0
        evaluated = 0
        for j in range(d):
            if evaluated >= m_try:
                break
            f = perm[j]
            first_v = X[inst2samp[sorted_idx[f, start]], f]
            last_v = X[inst2samp[sorted_idx[f, end - 1]], f]
            if first_v == last_v:
                continue
            evaluated += 1
            g_left = 0.0
            v_curr = first_v
            for p in range(start, end - 1):
                t = sorted_idx[f, p]
                g_left += grad[t]
                v_next = X[inst2samp[sorted_idx[f, p + 1]], f]
                if v_next > v_curr:
                    n_l = p - start + 1
                    n_r = n - n_l
                    g_right = g_total - g_left
                    gain = g_left * g_left / n_l + g_right * g_right / n_r - parent_score
                    if gain > best_gain or (gain == best_gain and best_f >= 0 and f < best_f):
                        thr = 0.5 * (v_curr + v_next)
                        if thr >= v_next:
                            thr = v_curr
                        best_gain = gain
                        best_f = f
                        best_thr = thr
                        best_nl = n_l
                v_curr = v_next

        if best_f < 0:
            leaf_value[node] = leaf_factor * g_total / h_total if h_total > 1e-150 else 0.0
            continue

        for p in range(start, start + best_nl):
            goes_left[sorted_idx[best_f, p]] = 1
        for g in range(d):
            wl = start
            wr = 0
            for p in range(start, end):
                t = sorted_idx[g, p]
                if goes_left[t] == 1:
                    sorted_idx[g, wl] = t
                    wl += 1
                else:
                    scratch[wr] = t
                    wr += 1
            for i in range(wr):
                sorted_idx[g, wl + i] = scratch[i]
        for p in range(start, start + best_nl):
            goes_left[sorted_idx[best_f, p]] = 0

        feature[node] = best_f
        threshold[node] = best_thr
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        stack[top, 0] = rid
        stack[top, 1] = start + best_nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + best_nl
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        leaf_value[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def predict_class_codes(feature, threshold, left, right, leaf_class, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]


@njit(cache=True, nogil=True)
def predict_leaf_values(feature, threshold, left, right, leaf_value, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_value[node]
