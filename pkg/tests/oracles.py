"""Independent brute-force oracles used to cross-check the solvers.

Nothing here shares code with the package's algorithms: the transportation
oracle enumerates every spanning-tree basis of the transportation polytope,
the reduction oracles enumerate subsets/partitions directly, and cell
centroids come from scipy or closed forms written from scratch.
"""

import itertools
import math
from functools import lru_cache

import numpy as np


# ---------------------------------------------------------------------------
# transportation LP by extreme-point enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _tree_tables(n: int, m: int):
    """Spanning trees of K_{n,m} encoded as parent arrays.

    Nodes 0..n-1 are supply rows, n..n+m-1 demand columns, node 0 the root.
    Candidates assign each non-root node a parent on the opposite side; the
    acyclic ones are exactly the spanning trees (m^(n-1) * n^m candidates,
    m^(n-1) * n^(m-1) survivors). Returns the ancestor tensor, per-edge cost
    indices into the flattened n x m cost matrix, and flow signs.
    """
    v_count = n + m
    num = (m ** max(n - 1, 0)) * (n ** m)
    idx = np.arange(num, dtype=np.int64)
    parents = np.zeros((num, v_count), dtype=np.int16)
    base = 1
    for i in range(1, n):
        parents[:, i] = n + (idx // base) % m
        base *= m
    for j in range(m):
        parents[:, n + j] = (idx // base) % n
        base *= n
    reach = parents.copy()
    rows_idx = np.arange(num)[:, None]
    for _ in range(int(math.ceil(math.log2(max(v_count, 2)))) + 1):
        reach = reach[rows_idx, reach]
    trees = parents[(reach == 0).all(axis=1)]
    t_count = trees.shape[0]

    anc = np.zeros((t_count, v_count, v_count), dtype=np.int8)
    cur = np.tile(np.arange(v_count, dtype=np.int16), (t_count, 1))
    t_idx = np.arange(t_count)[:, None]
    u_idx = np.tile(np.arange(v_count), (t_count, 1))
    for _ in range(v_count):
        anc[t_idx, u_idx, cur] = 1
        cur = trees[t_idx, cur]

    prn = trees[:, 1:].astype(np.int64)
    vs = np.arange(1, v_count, dtype=np.int64)
    is_row = vs < n
    i_idx = np.where(is_row[None, :], vs[None, :], prn)
    j_idx = np.where(is_row[None, :], prn - n, vs[None, :] - n)
    cost_idx = i_idx * m + j_idx
    sign = np.where(is_row, 1.0, -1.0)
    return anc, cost_idx, sign


def transport_bruteforce(p, q, cost, tol=1e-12):
    """Minimum transport cost as the best feasible spanning-tree basis."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    anc, cost_idx, sign = _tree_tables(n, m)
    s = np.concatenate([p, -q])
    flat = cost.ravel()
    best = math.inf
    chunk = 65536
    for lo in range(0, anc.shape[0], chunk):
        a = anc[lo:lo + chunk].astype(np.float64)
        subtree = np.einsum("tuv,u->tv", a, s)
        flows = subtree[:, 1:] * sign[None, :]
        feasible = (flows >= -tol).all(axis=1)
        if not feasible.any():
            continue
        vals = (flows * flat[cost_idx[lo:lo + chunk]]).sum(axis=1)
        best = min(best, float(vals[feasible].min()))
    return best


# ---------------------------------------------------------------------------
# ground metric and reduction oracles
# ---------------------------------------------------------------------------

def pnorm(diff, p):
    diff = np.atleast_2d(np.abs(np.asarray(diff, dtype=float)))
    if p == 1:
        return diff.sum(axis=-1)
    if p == 2:
        return np.sqrt((diff ** 2).sum(axis=-1))
    return diff.max(axis=-1)


def cost_matrix(points_a, points_b, l, p):
    pa, pb = np.atleast_2d(points_a), np.atleast_2d(points_b)
    return pnorm(pa[:, None, :] - pb[None, :, :], p) ** l


def support_value(points, weights, support, l, p):
    c = cost_matrix(points, np.atleast_2d(support), l, p)
    return float((np.asarray(weights) * c.min(axis=1)).sum()) ** (1.0 / l)


def naive_discrete(points, weights, m, l, p):
    """Minimum over every m-subset of the support, by direct enumeration."""
    points = np.atleast_2d(points)
    best = (math.inf, None)
    for subset in itertools.combinations(range(points.shape[0]), m):
        v = support_value(points, weights, points[list(subset)], l, p)
        if v < best[0]:
            best = (v, subset)
    return best


def partitions_into(n, m):
    """All partitions of range(n) into exactly m nonempty cells."""
    def rec(i, cells):
        if i == n:
            if len(cells) == m:
                yield [tuple(c) for c in cells]
            return
        for c in cells:
            c.append(i)
            yield from rec(i + 1, cells)
            c.pop()
        if len(cells) < m:
            cells.append([i])
            yield from rec(i + 1, cells)
            cells.pop()
    yield from rec(0, [])


def scipy_cell_cost(points, weights, l, p):
    """Best single-center cost of a cell, via scipy (independent of the
    package's centroid solvers)."""
    from scipy.optimize import minimize

    points = np.atleast_2d(points)
    weights = np.asarray(weights, dtype=float)
    if l == 2 and p == 2:
        center = np.average(points, axis=0, weights=weights)
        return float((weights * ((points - center) ** 2).sum(axis=1)).sum())

    def objective(z):
        return float((weights * pnorm(points - z, p) ** l).sum())

    start = np.average(points, axis=0, weights=weights)
    best = objective(start)
    for method in ("Nelder-Mead", "Powell"):
        res = minimize(objective, start, method=method,
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000}
                       if method == "Nelder-Mead" else {"xtol": 1e-12, "ftol": 1e-14})
        best = min(best, float(res.fun))
    return best


def naive_continuous(points, weights, m, l, p):
    """Minimum over every m-cell partition, pricing cells through scipy."""
    points = np.atleast_2d(points)
    weights = np.asarray(weights, dtype=float)
    cache = {}
    best = math.inf
    for cells in partitions_into(points.shape[0], m):
        total = 0.0
        for cell in cells:
            if cell not in cache:
                idx = list(cell)
                cache[cell] = scipy_cell_cost(points[idx], weights[idx], l, p)
            total += cache[cell]
        best = min(best, total)
    return best ** (1.0 / l)


def golden_min(f, lo, hi, tol=1e-13):
    """Golden-section minimum of a unimodal function on [lo, hi]."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = f(d)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def greedy_reference(points, weights, m, l, p):
    """Textbook greedy selection, recomputing every candidate from scratch."""
    points = np.atleast_2d(points)
    n = points.shape[0]
    chosen = []
    for _ in range(m):
        best = (math.inf, None)
        for c in range(n):
            if c in chosen:
                continue
            v = support_value(points, weights, points[chosen + [c]], l, p)
            if v < best[0]:
                best = (v, c)
        chosen.append(best[1])
    return support_value(points, weights, points[chosen], l, p), chosen
