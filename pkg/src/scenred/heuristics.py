"""Reduction heuristics: greedy selection, generalized k-means, local search.

All three return a :class:`ReductionResult` whose value is the attained
Wasserstein distance to the reduced distribution. Randomized initializations
take an explicit seed, so every run is reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (DiscreteDistribution, Metric, ReductionResult,
                   ValidationError)
from .geometry import centroid, distance_matrix
from .transport import dist_to_support


def _check_m(n: int, m: int) -> None:
    if not 1 <= m <= n:
        raise ValidationError(f"m must lie in [1, {n}], got {m}")


def _result(p, support, metric, algorithm, iterations, evaluations):
    sd = dist_to_support(p, support, metric)
    return ReductionResult(support=sd.reduced.points, weights=sd.reduced.weights,
                           partition=sd.assignment, value=sd.value,
                           algorithm=algorithm, iterations=iterations,
                           evaluations=evaluations)


def _as_points(values, dim: int) -> np.ndarray:
    """Coerce a point list to (k, dim); 1-D input is a column when dim == 1."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    return arr


def dupacova_greedy(p: DiscreteDistribution, m: int, metric: Metric) -> ReductionResult:
    """Greedy forward selection of m support atoms (efficient variant).

    Keeps the per-atom distance to the current reduced set, so adding a
    candidate is priced in O(n); candidate ties break to the lowest atom
    index. The reduced support is returned in selection order.
    """
    n = p.n
    _check_m(n, m)
    dm = distance_matrix(p.points, p.points, metric).entries
    near = np.full(n, np.inf)
    available = np.ones(n, dtype=bool)
    chosen: list[int] = []
    evaluations = 0
    for _ in range(m):
        cand = np.nonzero(available)[0]
        totals = p.weights @ np.minimum(near[:, None], dm[:, cand])
        evaluations += cand.size * n
        c = int(cand[int(totals.argmin())])
        chosen.append(c)
        available[c] = False
        near = np.minimum(near, dm[:, c])
    return _result(p, p.points[chosen], metric, "dupacova_greedy",
                   iterations=m, evaluations=evaluations)


def _resolve_centers(p: DiscreteDistribution, m: int, init) -> np.ndarray:
    if init is None:
        init = 0
    if isinstance(init, (int, np.integer)):
        rng = np.random.default_rng(int(init))
        idx = np.sort(rng.choice(p.n, size=m, replace=False))
        return p.points[idx].copy()
    if isinstance(init, ReductionResult):
        init = init.support
    centers = _as_points(init, p.dim)
    if centers.shape != (m, p.dim):
        raise ValidationError(
            f"explicit init must provide {m} points of dimension {p.dim}")
    return centers.copy()


def k_means_generalized(p: DiscreteDistribution, m: int, metric: Metric,
                        init=None, max_iter: int = 200,
                        centroid_tol: float = 1e-10) -> ReductionResult:
    """Alternating nearest-center assignment and per-cell centroid updates.

    `init` is an explicit list of m centers, a ReductionResult, or an integer
    seed drawing an m-subset of the support uniformly (default seed 0).
    Assignment ties break to the lowest center index; cells that empty out
    are re-seeded with the atom farthest from its assigned center. Stops when
    no center coordinate moves by 1e-12, or after `max_iter` rounds.
    """
    n = p.n
    _check_m(n, m)
    centers = _resolve_centers(p, m, init)
    evaluations = 0
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        dm = distance_matrix(p.points, centers, metric).entries
        labels = dm.argmin(axis=1)
        evaluations += n * m
        counts = np.bincount(labels, minlength=m)
        if np.any(counts == 0):
            nearest = dm[np.arange(n), labels]
            taken: set[int] = set()
            for j in np.nonzero(counts == 0)[0]:
                order = np.argsort(-nearest, kind="stable")
                k = next(int(a) for a in order if int(a) not in taken)
                taken.add(k)
                centers[j] = p.points[k]
            dm = distance_matrix(p.points, centers, metric).entries
            labels = dm.argmin(axis=1)
            evaluations += n * m
        new_centers = centers.copy()
        for j in range(m):
            cell = np.nonzero(labels == j)[0]
            if cell.size:
                new_centers[j] = centroid(p.points[cell], p.weights[cell],
                                          metric, centroid_tol)
        delta = float(np.abs(new_centers - centers).max())
        centers = new_centers
        if delta < 1e-12:
            break
    return _result(p, centers, metric, "k_means_generalized",
                   iterations=iterations, evaluations=evaluations)


def _resolve_subset(p: DiscreteDistribution, m: int, init) -> list[int]:
    """Initial medoid index set for local search."""
    if init is None:
        # the m most frequent atoms, ties by index
        order = np.lexsort((np.arange(p.n), -p.weights))
        return sorted(int(i) for i in order[:m])
    if isinstance(init, (int, np.integer)):
        rng = np.random.default_rng(int(init))
        return sorted(int(i) for i in rng.choice(p.n, size=m, replace=False))
    if isinstance(init, ReductionResult):
        init = init.support
    arr = np.asarray(init)
    if arr.ndim == 1 and arr.dtype.kind in "iu":
        idx = [int(i) for i in arr]
    else:
        lookup: dict[bytes, int] = {}
        for i, row in enumerate(p.points):
            lookup.setdefault(row.tobytes(), i)
        idx = []
        for row in _as_points(init, p.dim):
            key = row.tobytes()
            if key not in lookup:
                raise ValidationError("init point is not an atom of the distribution")
            idx.append(lookup[key])
    chosen = sorted(set(idx))
    if len(chosen) > m or any(i < 0 or i >= p.n for i in chosen):
        raise ValidationError(f"init must be a subset of {m} distinct atoms")
    if len(chosen) < m:
        # an init that collapsed below m atoms (duplicate atoms get merged by
        # the zero-mass drop rule) is completed with the heaviest unused atoms
        order = np.lexsort((np.arange(p.n), -p.weights))
        for i in order:
            if len(chosen) == m:
                break
            if int(i) not in chosen:
                chosen.append(int(i))
        chosen.sort()
    return chosen


def local_search(p: DiscreteDistribution, m: int, metric: Metric, init=None,
                 strategy: str = "best_fit", epsilon: float = 0.0,
                 max_iter: int = 10**6) -> ReductionResult:
    """Single-swap local search over m-subsets of the support.

    `best_fit` scans all swaps and applies the best; `first_fit` applies the
    first improving swap in (incoming index, outgoing index) order. With
    epsilon > 0 a swap must shrink the current distance by the relative
    factor epsilon / ((n-m) m), which bounds the number of iterations
    polynomially. Default init is the m most heavily weighted atoms.
    """
    n = p.n
    _check_m(n, m)
    if epsilon < 0:
        raise ValidationError("epsilon must be nonnegative")
    if strategy not in ("best_fit", "first_fit"):
        raise ValidationError(f"unknown strategy {strategy!r}")
    current = _resolve_subset(p, m, init)
    dm = distance_matrix(p.points, p.points, metric).entries
    w = p.weights
    evaluations = 0
    swaps = 0
    if m == n:
        return _result(p, p.points[current], metric,
                       f"local_search({strategy})", 0, 0)
    # relative acceptance factor in powered-cost units
    shrink = (1.0 - epsilon / ((n - m) * m)) ** metric.l if epsilon > 0 else 1.0

    def subset_cost(idx: list[int]) -> float:
        return float(w @ np.min(dm[:, idx], axis=1))

    cost = subset_cost(current)
    for _ in range(max_iter):
        cols = dm[:, current]
        pos = cols.argmin(axis=1)
        d1 = cols[np.arange(n), pos]
        if m > 1:
            part = np.partition(cols, 1, axis=1)
            d2 = part[:, 1]
        else:
            d2 = np.full(n, np.inf)
        in_set = np.zeros(n, dtype=bool)
        in_set[current] = True
        threshold = cost * shrink if epsilon > 0 else cost
        applied = False
        if strategy == "best_fit":
            best = (math.inf, -1, -1)
            for r_pos, r in enumerate(current):
                base = np.where(pos == r_pos, d2, d1)
                cand_costs = w @ np.minimum(base[:, None], dm)
                evaluations += n * n
                cand_costs[in_set] = math.inf
                c = int(cand_costs.argmin())
                val = float(cand_costs[c])
                if (val, c, r) < best:
                    best = (val, c, r)
            val, c, r = best
            ok = val < threshold if epsilon > 0 else val < cost
            if ok:
                current.remove(r)
                current.append(c)
                current.sort()
                cost = val
                swaps += 1
                applied = True
        else:
            for c in range(n):
                if in_set[c]:
                    continue
                for r_pos, r in enumerate(current):
                    base = np.where(pos == r_pos, d2, d1)
                    val = float(w @ np.minimum(base, dm[:, c]))
                    evaluations += n
                    ok = val < threshold if epsilon > 0 else val < cost
                    if ok:
                        current.remove(r)
                        current.append(c)
                        current.sort()
                        cost = val
                        swaps += 1
                        applied = True
                        break
                if applied:
                    break
        if not applied:
            break
    return _result(p, p.points[current], metric, f"local_search({strategy})",
                   iterations=swaps, evaluations=evaluations)


def continuous_polish(result: ReductionResult, p: DiscreteDistribution,
                      metric: Metric, tol: float = 1e-10,
                      max_iter: int = 200) -> ReductionResult:
    """Replace every support point by its cell centroid until stable.

    This is the generalized k-means iteration warm-started at the given
    (typically discrete) solution; the polished value never exceeds the
    input value.
    """
    if result.partition.n != p.n:
        raise ValidationError("result partition does not match the distribution")
    polished = k_means_generalized(p, result.m, metric, init=result.support,
                                   max_iter=max_iter, centroid_tol=tol)
    return ReductionResult(support=polished.support, weights=polished.weights,
                           partition=polished.partition, value=polished.value,
                           algorithm="continuous_polish",
                           iterations=polished.iterations,
                           evaluations=polished.evaluations)
