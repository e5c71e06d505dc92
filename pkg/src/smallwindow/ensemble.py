"""CART regression trees and bagged random-forest regression.

Windows here hold a handful of rows, so trees are grown with plain Python
lists; numpy call overhead would dominate at this size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numeric import ContractError, RngState, as_matrix, as_vector, derive_seed

# a split must remove more than this fraction of the node's SSE
GAIN_RTOL = 1e-12


@dataclass(frozen=True, slots=True)
class Leaf:
    value: float
    n_members: int


@dataclass(frozen=True, slots=True)
class Split:
    variable: int
    threshold: float
    left: "Leaf | Split"
    right: "Leaf | Split"


TreeNode = Leaf | Split


@dataclass(frozen=True)
class SplitCandidate:
    variable: int
    threshold: float
    gain: float


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 1000
    mtry: int | None = None   # None -> max(1, c // 3)
    min_leaf: int = 1

    def resolve_mtry(self, n_variables: int) -> int:
        mtry = self.mtry if self.mtry is not None else max(1, n_variables // 3)
        if not 1 <= mtry <= n_variables:
            raise ContractError(f"mtry must lie in [1, {n_variables}], got {mtry}")
        return mtry


@dataclass(frozen=True)
class Forest:
    trees: list
    n_trees: int
    mtry: int
    min_leaf: int
    seed: int
    n_variables: int
    y_min: float = field(repr=False)
    y_max: float = field(repr=False)

    def predict(self, x) -> float:
        return predict_forest(self, x)


def _leaf(ys: list[float]) -> Leaf:
    v = math.fsum(ys) / len(ys)
    return Leaf(min(max(v, min(ys)), max(ys)), len(ys))


def best_split(cols, y, idx, variables, min_leaf) -> SplitCandidate | None:
    """Highest-gain split of the rows ``idx`` over ``variables``.

    Thresholds are midpoints between adjacent distinct sorted values.  Both
    sides must keep ``min_leaf`` rows.  Equal gains resolve to the lowest
    variable, then the lowest threshold.
    """
    n = len(idx)
    ys = [y[i] for i in idx]
    mean = math.fsum(ys) / n
    total = math.fsum(v - mean for v in ys)
    sse_parent = math.fsum((v - mean) ** 2 for v in ys) - total * total / n
    floor = GAIN_RTOL * sse_parent
    base = total * total / n
    best = None
    best_gain = floor
    for v in sorted(variables):
        col = cols[v]
        order = sorted(idx, key=col.__getitem__)
        xs = [col[i] for i in order]
        if xs[0] == xs[-1]:
            continue
        sl = 0.0
        for k in range(1, n):
            sl += y[order[k - 1]] - mean
            if k < min_leaf:
                continue
            if n - k < min_leaf:
                break
            if xs[k - 1] == xs[k]:
                continue
            sr = total - sl
            gain = sl * sl / k + sr * sr / (n - k) - base
            if gain > best_gain:
                best_gain = gain
                thr = 0.5 * (xs[k - 1] + xs[k])
                if thr >= xs[k]:
                    thr = xs[k - 1]
                best = SplitCandidate(v, thr, gain)
    return best


def _grow(cols, y, idx, mtry, min_leaf, rng: RngState, n_vars: int) -> TreeNode:
    ys = [y[i] for i in idx]
    if len(idx) < 2 * min_leaf or min(ys) == max(ys):
        return _leaf(ys)
    variables = rng.sample_without_replacement(n_vars, mtry)
    cand = best_split(cols, y, idx, variables, min_leaf)
    if cand is None:
        return _leaf(ys)
    col = cols[cand.variable]
    thr = cand.threshold
    left = [i for i in idx if col[i] <= thr]
    right = [i for i in idx if col[i] > thr]
    return Split(
        cand.variable, thr,
        _grow(cols, y, left, mtry, min_leaf, rng, n_vars),
        _grow(cols, y, right, mtry, min_leaf, rng, n_vars),
    )


def _columns(X: np.ndarray) -> list[list[float]]:
    return X.T.tolist()


def fit_tree(X, y, mtry: int, min_leaf: int, rng: RngState) -> TreeNode:
    """Grow one CART tree on all rows of ``X``.

    At each node ``mtry`` distinct variables are drawn; growth stops when the
    node has fewer than ``2 * min_leaf`` rows, constant y, or no split with
    positive SSE reduction.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise ContractError("fit_tree needs matching, non-empty X and y")
    if not 1 <= mtry <= X.shape[1] or min_leaf < 1:
        raise ContractError("need 1 <= mtry <= n_variables and min_leaf >= 1")
    return _grow(_columns(X), y.tolist(), list(range(X.shape[0])), mtry, min_leaf, rng, X.shape[1])


def predict_tree(node: TreeNode, x, n_variables: int | None = None) -> float:
    if n_variables is not None and len(x) != n_variables:
        raise ContractError(f"x has length {len(x)}, tree expects {n_variables}")
    while isinstance(node, Split):
        node = node.left if x[node.variable] <= node.threshold else node.right
    return node.value


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_leaves(node: TreeNode):
    if isinstance(node, Leaf):
        yield node
    else:
        yield from tree_leaves(node.left)
        yield from tree_leaves(node.right)


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row order sorted by (x_0, ..., x_{c-1}, y).

    Bootstrap draws index into this order, so shuffling the training rows
    does not change the forest.
    """
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def fit_forest(X, y, cfg: ForestConfig | None = None, seed: int = 0) -> Forest:
    """Bagged trees; tree ``i`` draws its bootstrap and splits from
    ``RngState(seed ^ i)``, so trees can be grown in any order."""
    cfg = cfg or ForestConfig()
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    n, c = X.shape
    if n < 1 or n != y.shape[0]:
        raise ContractError("fit_forest needs matching, non-empty X and y")
    if cfg.n_trees < 1 or cfg.min_leaf < 1:
        raise ContractError("n_trees and min_leaf must be >= 1")
    mtry = cfg.resolve_mtry(c)
    order = canonical_order(X, y)
    Xs, ys = X[order], y[order]
    cols, ylist = _columns(Xs), ys.tolist()
    trees = []
    for i in range(cfg.n_trees):
        rng = RngState(derive_seed(seed, i))
        boot = [rng.uniform_index(n) for _ in range(n)]
        trees.append(_grow(cols, ylist, boot, mtry, cfg.min_leaf, rng, c))
    return Forest(
        trees=trees, n_trees=cfg.n_trees, mtry=mtry, min_leaf=cfg.min_leaf,
        seed=int(seed), n_variables=c, y_min=float(y.min()), y_max=float(y.max()),
    )


def tree_predictions(f: Forest, x) -> list[float]:
    x = _check_x(f, x)
    return [predict_tree(t, x) for t in f.trees]


def _check_x(f: Forest, x) -> list[float]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (f.n_variables,):
        raise ContractError(f"x has shape {x.shape}, forest expects ({f.n_variables},)")
    return x.tolist()


def predict_forest(f: Forest, x) -> float:
    """Mean of the per-tree predictions, kept inside the training y range."""
    preds = tree_predictions(f, x)
    v = math.fsum(preds) / len(preds)
    return min(max(v, f.y_min), f.y_max)
