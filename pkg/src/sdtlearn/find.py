"""Exact minimization of empirical error over depth-bounded decision trees.

``find`` performs the recursive backtracking search: try every free
variable at the root, recurse on both restrictions with one less depth,
and keep the best.  Two exact optimizations keep desk-scale instances
fast: rows are compressed to distinct inputs with integer label weights,
and subproblems are memoized by (restriction, depth).  The same
restriction is reached once per ordering of its variables, so the cache
collapses up to d! duplicate searches without changing the result.

Tie-breaking is total (smallest variable index wins; constant ties
resolve to 0), so the returned tree is a canonical function of the input.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .trees import Leaf, Node, Query, StochasticTree, mean_on_points, pack_inputs


@dataclass(frozen=True)
class Restriction:
    """A root-to-node path as a canonical (variable, bit) assignment."""

    fixed: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        variables = [v for v, _ in self.fixed]
        if variables != sorted(set(variables)):
            raise ValueError("restriction must be sorted by variable, without repeats")

    def assign(self, var: int, bit: int) -> "Restriction":
        return Restriction(tuple(sorted(self.fixed + ((var, bit),))))

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.fixed)


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    cache_hits: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class FindResult:
    tree: StochasticTree
    error_count: int
    empirical_error: float
    stats: SearchStats = field(compare=False)


class _Solver:
    def __init__(self, uz: np.ndarray, w0: np.ndarray, w1: np.ndarray, n: int, memo: bool):
        self.uz = uz
        self.w0 = w0
        self.w1 = w1
        self.n = n
        self.cache: dict | None = {} if memo else None
        self.stats = SearchStats()
        self.lock = threading.Lock()

    def solve(self, idx: np.ndarray, fixed: tuple, mask: int, depth: int) -> tuple[Node, int]:
        if idx.size == 0:
            # Empty restriction: any tree is vacuously optimal; the
            # constant tie rule picks the 0-leaf.
            return Leaf(0), 0
        key = (fixed, depth)
        if self.cache is not None:
            with self.lock:
                hit = self.cache.get(key)
            if hit is not None:
                with self.lock:
                    self.stats.cache_hits += 1
                return hit
        with self.lock:
            self.stats.nodes_expanded += 1

        ones = int(self.w1[idx].sum())
        zeros = int(self.w0[idx].sum())
        if depth == 0 or mask.bit_count() == self.n:
            label = 1 if ones > zeros else 0
            result: tuple[Node, int] = (Leaf(label), zeros if label else ones)
        else:
            best_err = -1
            best_node: Node = Leaf(0)
            zvals = self.uz[idx]
            for var in range(self.n):
                if (mask >> var) & 1:
                    continue  # querying a path-fixed variable cannot reduce error
                bit = (zvals >> var) & 1
                idx0 = idx[bit == 0]
                idx1 = idx[bit == 1]
                child_mask = mask | (1 << var)
                node0, err0 = self.solve(idx0, _extend(fixed, var, 0), child_mask, depth - 1)
                node1, err1 = self.solve(idx1, _extend(fixed, var, 1), child_mask, depth - 1)
                if best_err < 0 or err0 + err1 < best_err:
                    best_err = err0 + err1
                    best_node = Query(var, node0, node1)
            result = (best_node, best_err)

        if self.cache is not None:
            with self.lock:
                self.cache[key] = result
        return result


def _extend(fixed: tuple, var: int, bit: int) -> tuple:
    return tuple(sorted(fixed + ((var, bit),)))


def _compress(dataset: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    zs = pack_inputs(dataset.xs)
    uz, inverse = np.unique(zs, return_inverse=True)
    total = np.bincount(inverse, minlength=uz.size).astype(np.int64)
    w1 = np.bincount(inverse, weights=dataset.ys.astype(np.float64), minlength=uz.size)
    w1 = np.rint(w1).astype(np.int64)
    return uz, total - w1, w1


def find(
    dataset: Dataset,
    depth: int,
    *,
    memo: bool = True,
    threads: int = 1,
) -> FindResult:
    """Return the canonical minimum-empirical-error tree of depth <= depth.

    With ``threads > 1`` the root's per-variable subproblems run on a
    thread pool; the final argmin sees the complete result set, so the
    output tree is identical for every thread count.
    """
    if depth < 0:
        raise ValueError("depth budget must be nonnegative")
    start = time.perf_counter()
    uz, w0, w1 = _compress(dataset)
    solver = _Solver(uz, w0, w1, dataset.n, memo)
    all_idx = np.arange(uz.size, dtype=np.int64)

    if threads > 1 and depth >= 1 and dataset.n >= 1 and uz.size > 0:
        with solver.lock:
            solver.stats.nodes_expanded += 1
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                var: (
                    pool.submit(_root_child, solver, all_idx, var, 0, depth),
                    pool.submit(_root_child, solver, all_idx, var, 1, depth),
                )
                for var in range(dataset.n)
            }
            candidates = []
            for var in range(dataset.n):
                node0, err0 = futures[var][0].result()
                node1, err1 = futures[var][1].result()
                candidates.append((err0 + err1, var, Query(var, node0, node1)))
        err, _, node = min(candidates, key=lambda c: (c[0], c[1]))
    else:
        node, err = solver.solve(all_idx, (), 0, depth)

    solver.stats.wall_time = time.perf_counter() - start
    m = dataset.m
    return FindResult(
        tree=StochasticTree(dataset.n, node),
        error_count=int(err),
        empirical_error=err / m if m else 0.0,
        stats=solver.stats,
    )


def _root_child(solver: _Solver, all_idx: np.ndarray, var: int, bit: int, depth: int):
    sub = all_idx[((solver.uz >> var) & 1) == bit]
    return solver.solve(sub, ((var, bit),), 1 << var, depth - 1)


def empirical_error(tree: StochasticTree, dataset: Dataset) -> float:
    """Fraction of rows the tree misclassifies (stochastic trees contribute
    their per-row disagreement probability)."""
    if dataset.m == 0:
        return 0.0
    mu = mean_on_points(tree, dataset.packed())
    return float(np.mean(np.where(dataset.ys == 1, 1.0 - mu, mu)))


def find_brute_oracle(dataset: Dataset, depth: int, tree_limit: int = 5_000_000) -> float:
    """Minimal empirical error over ALL depth-<= depth trees, by enumeration.

    Independent check for ``find``: every tree is generated explicitly
    (including ones that re-query path variables), so agreement is not
    inherited from shared search logic.  Feasible around n <= 4, depth <= 2.
    """
    if depth < 0:
        raise ValueError("depth budget must be nonnegative")
    n = dataset.n
    count = 2
    for _ in range(depth):
        count = 2 + n * count * count
    if count > tree_limit:
        raise ValueError(f"would enumerate {count} trees, above the limit {tree_limit}")

    uz, w0, w1 = _compress(dataset)
    if uz.size == 0:
        return 0.0
    preds = [np.zeros(uz.size, dtype=np.uint8), np.ones(uz.size, dtype=np.uint8)]
    for _ in range(depth):
        prev = preds
        preds = list(prev)
        for var in range(n):
            bit = ((uz >> var) & 1).astype(bool)
            for p0 in prev:
                for p1 in prev:
                    preds.append(np.where(bit, p1, p0))
    m = int(w0.sum() + w1.sum())
    best = min(int(w1[p == 0].sum() + w0[p == 1].sum()) for p in preds)
    return best / m
