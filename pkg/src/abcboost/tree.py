"""Weighted regression trees with exhaustive presorted split search.

Trees are grown best-first to at most J terminal nodes. Two split gains
are supported: the second-order criterion

    gain = GL^2/HL + GR^2/HR - (GL+GR)^2/(HL+HR)

(the weighted-MSE reduction with per-sample numerators g and weights h),
and the first-order criterion, which is the same reduction with unit
weights, i.e. the denominators are the left/right/total sample counts.
Both are plain variance reductions and hence non-negative up to rounding.
Leaf values are always sum(g)/max(sum(h), eps) with the true weights h.
Routing is "x[feature] <= threshold goes left". All tie-breaks are fixed
(lowest feature index, then lowest threshold; oldest leaf expanded first)
so fits are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from numba import njit

from .data import FeatureOrder

EPS_DENOM = 1e-12  # floor for second-order denominators and leaf values


class SplitCriterion(Enum):
    FIRST_ORDER = "first-order"
    SECOND_ORDER = "second-order"


class GradientPairs(NamedTuple):
    """Per-sample numerators g (negative gradients) and weights h >= 0."""

    g: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class RegressionTree:
    """Flat node-array binary tree; feature[v] < 0 marks node v as a leaf."""

    feature: np.ndarray  # (n_nodes,) int32, -1 for leaves
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray  # (n_nodes,) int32
    right: np.ndarray  # (n_nodes,) int32
    value: np.ndarray  # (n_nodes,) float64, meaningful at leaves

    def __post_init__(self):
        n = len(self.feature)
        if n < 1 or len(self.threshold) != n or len(self.left) != n or len(self.right) != n:
            raise ValueError("inconsistent node arrays")
        for v in range(n):
            if self.feature[v] >= 0:
                l, r = self.left[v], self.right[v]
                if not (v < l < n and v < r < n):
                    raise ValueError(f"node {v}: invalid children ({l}, {r})")

    @property
    def num_nodes(self) -> int:
        return len(self.feature)

    @property
    def leaf_count(self) -> int:
        return int(np.sum(self.feature < 0))

    def scaled(self, factor: float) -> "RegressionTree":
        return RegressionTree(self.feature, self.threshold, self.left, self.right,
                              self.value * factor)


def gain_at_split(sum_g_left: float, sum_h_left: float, sum_g_right: float,
                  sum_h_right: float, criterion: SplitCriterion) -> float:
    """Split gain from left/right aggregates, denominators floored.

    For the second-order criterion pass the weight sums; for the
    first-order criterion pass the left/right sample counts (unit
    weights). The three-term expression is the same in both cases.
    """
    gl, gr = sum_g_left, sum_g_right
    gt = gl + gr
    hl, hr = sum_h_left, sum_h_right
    if hl < 0 or hr < 0:
        raise ValueError("gain requires non-negative weight sums / counts")
    ht = hl + hr
    return (gl * gl / max(hl, EPS_DENOM)
            + gr * gr / max(hr, EPS_DENOM)
            - gt * gt / max(ht, EPS_DENOM))


@njit(cache=True)
def _scan_node(X, g, h, pos, start, end, first_order, min_leaf, eps):
    """Best split over one node's presorted segment.

    Returns (gain, feature, threshold); feature is -1 when no candidate
    has positive gain. First candidate found wins ties (features scanned
    ascending, thresholds ascending within a feature).
    """
    d_count = X.shape[1]
    n = end - start
    gt = 0.0
    ht = 0.0
    for j in range(start, end):
        i = pos[0, j]
        gt += g[i]
        ht += h[i]
    if first_order:
        total_term = gt * gt / n
    else:
        total_term = gt * gt / max(ht, eps)
    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    for d in range(d_count):
        gl = 0.0
        hl = 0.0
        for j in range(start, end - 1):
            i = pos[d, j]
            gl += g[i]
            hl += h[i]
            cnt = j - start + 1
            if cnt < min_leaf or (n - cnt) < min_leaf:
                continue
            v = X[i, d]
            nv = X[pos[d, j + 1], d]
            if nv <= v:
                continue
            gr = gt - gl
            if first_order:
                gain = (gl * gl / cnt
                        + gr * gr / (n - cnt)
                        - total_term)
            else:
                hr = ht - hl
                gain = (gl * gl / max(hl, eps)
                        + gr * gr / max(hr, eps)
                        - total_term)
            if gain > best_gain:
                best_gain = gain
                best_feat = d
                best_thr = 0.5 * (v + nv)
    return best_gain, best_feat, best_thr


@njit(cache=True)
def _fit_tree(X, g, h, order, J, first_order, min_leaf, eps):
    """Best-first growth to at most J leaves over presorted index segments."""
    n_samples = X.shape[0]
    d_count = X.shape[1]
    max_nodes = 2 * J - 1
    feat = np.full(max_nodes, -1, np.int32)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    value = np.zeros(max_nodes, np.float64)
    seg_start = np.zeros(max_nodes, np.int64)
    seg_end = np.zeros(max_nodes, np.int64)
    cand_gain = np.zeros(max_nodes, np.float64)
    cand_feat = np.full(max_nodes, -1, np.int64)
    cand_thr = np.zeros(max_nodes, np.float64)
    is_leaf = np.zeros(max_nodes, np.bool_)

    pos = order.copy()
    buf = np.empty(n_samples, np.int32)
    go_left = np.zeros(n_samples, np.bool_)

    # root
    seg_start[0] = 0
    seg_end[0] = n_samples
    is_leaf[0] = True
    sg = 0.0
    sh = 0.0
    for j in range(n_samples):
        i = pos[0, j]
        sg += g[i]
        sh += h[i]
    value[0] = sg / max(sh, eps)
    if n_samples >= 2 * min_leaf and n_samples >= 2:
        cand_gain[0], cand_feat[0], cand_thr[0] = _scan_node(
            X, g, h, pos, 0, n_samples, first_order, min_leaf, eps)
    n_nodes = 1
    n_leaves = 1

    while n_leaves < J:
        # oldest leaf with the strictly largest positive cached gain
        pick = -1
        pick_gain = 0.0
        for v in range(n_nodes):
            if is_leaf[v] and cand_feat[v] >= 0 and cand_gain[v] > pick_gain:
                pick = v
                pick_gain = cand_gain[v]
        if pick < 0:
            break
        s = seg_start[pick]
        e = seg_end[pick]
        fd = cand_feat[pick]
        t = cand_thr[pick]
        n_left = 0
        for j in range(s, e):
            i = pos[fd, j]
            gl_side = X[i, fd] <= t
            go_left[i] = gl_side
            if gl_side:
                n_left += 1
        # stable partition of every feature's segment: lefts keep order,
        # rights follow, preserving sorted order on both sides
        for d in range(d_count):
            a = s
            b = 0
            for j in range(s, e):
                i = pos[d, j]
                if go_left[i]:
                    pos[d, a] = i
                    a += 1
                else:
                    buf[b] = i
                    b += 1
            for j in range(b):
                pos[d, a + j] = buf[j]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        feat[pick] = np.int32(fd)
        thr[pick] = t
        left[pick] = lc
        right[pick] = rc
        is_leaf[pick] = False
        seg_start[lc] = s
        seg_end[lc] = s + n_left
        seg_start[rc] = s + n_left
        seg_end[rc] = e
        for child in (lc, rc):
            is_leaf[child] = True
            cs = seg_start[child]
            ce = seg_end[child]
            sg = 0.0
            sh = 0.0
            for j in range(cs, ce):
                i = pos[0, j]
                sg += g[i]
                sh += h[i]
            value[child] = sg / max(sh, eps)
            if ce - cs >= 2 * min_leaf and ce - cs >= 2:
                cand_gain[child], cand_feat[child], cand_thr[child] = _scan_node(
                    X, g, h, pos, cs, ce, first_order, min_leaf, eps)
        n_leaves += 1

    leaf_of = np.empty(n_samples, np.int32)
    for v in range(n_nodes):
        if is_leaf[v]:
            for j in range(seg_start[v], seg_end[v]):
                leaf_of[pos[0, j]] = np.int32(v)
    return (feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes],
            value[:n_nodes], leaf_of)


@njit(cache=True)
def _predict_batch(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        v = 0
        while feature[v] >= 0:
            if X[i, feature[v]] <= threshold[v]:
                v = left[v]
            else:
                v = right[v]
        out[i] = value[v]
    return out


def best_split(samples, pairs: GradientPairs, order: FeatureOrder,
               criterion: SplitCriterion, min_leaf: int = 1):
    """Best (feature, threshold, gain) over a sample subset, or None.

    Scans every feature along its presorted order restricted to ``samples``;
    candidates sit between distinct consecutive values, threshold at the
    midpoint. Ties go to the lower feature index, then lower threshold.
    """
    member = np.zeros(order.num_samples, dtype=bool)
    member[np.asarray(samples, dtype=np.int64)] = True
    n = int(member.sum())
    if n < 2 * min_leaf or n < 2:
        return None
    sub = np.ascontiguousarray(
        np.stack([row[member[row]] for row in order.order]))
    gain, feat, thr = _scan_node(
        order.features, pairs.g, pairs.h, sub, 0, n,
        criterion is SplitCriterion.FIRST_ORDER, min_leaf, EPS_DENOM)
    if feat < 0:
        return None
    return int(feat), float(thr), float(gain)


def fit_tree(pairs: GradientPairs, order: FeatureOrder, J: int,
             criterion: SplitCriterion, min_leaf: int = 1,
             return_leaf_of: bool = False):
    """Fit a J-terminal-node tree to (g, h) over the presorted dataset."""
    if J < 2:
        raise ValueError("J must be >= 2")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    g = np.ascontiguousarray(pairs.g, dtype=np.float64)
    h = np.ascontiguousarray(pairs.h, dtype=np.float64)
    if g.shape != (order.num_samples,) or h.shape != g.shape:
        raise ValueError("gradient arrays must match the dataset length")
    feat, thr, left, right, value, leaf_of = _fit_tree(
        order.features, g, h, order.order, J,
        criterion is SplitCriterion.FIRST_ORDER, min_leaf, EPS_DENOM)
    tree = RegressionTree(feat, thr, left, right, value)
    if return_leaf_of:
        return tree, leaf_of
    return tree


def tree_predict(tree: RegressionTree, x) -> float:
    """Route one feature vector to its leaf ("<= goes left") and return its value."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a 1-d feature vector")
    v = 0
    while tree.feature[v] >= 0:
        f = tree.feature[v]
        if f >= x.shape[0]:
            raise ValueError(f"feature vector of length {x.shape[0]} lacks feature {f}")
        v = tree.left[v] if x[f] <= tree.threshold[v] else tree.right[v]
    return float(tree.value[v])


def tree_predict_batch(tree: RegressionTree, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _predict_batch(tree.feature, tree.threshold, tree.left, tree.right,
                          tree.value, X)
