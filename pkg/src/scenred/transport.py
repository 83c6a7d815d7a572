"""Exact type-l Wasserstein distance between finite discrete distributions.

`wasserstein` solves the transportation LP with a transportation simplex
(northwest-corner start, cycle pivoting, Bland's rule); `dist_to_support` is
the semi-discrete fast path to a fixed support set, which admits the closed
form "ship every atom to its nearest support point".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (DiscreteDistribution, Metric, Partition, ValidationError,
                   require_valid)
from .geometry import distance_matrix


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix with its marginals; row i ships mass of atom i."""

    matrix: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.matrix > 0))


class _Tableau:
    """Working state of the transportation simplex on an n x m cost matrix."""

    def __init__(self, supply: np.ndarray, demand: np.ndarray, cost: np.ndarray):
        self.n, self.m = cost.shape
        self.cost = cost
        self.flow = np.zeros((self.n, self.m))
        self.basis: list[tuple[int, int]] = []
        self._northwest_start(supply.copy(), demand.copy())

    def _northwest_start(self, a: np.ndarray, b: np.ndarray) -> None:
        i = j = 0
        while True:
            t = min(a[i], b[j])
            self.flow[i, j] = t
            self.basis.append((i, j))
            a[i] -= t
            b[j] -= t
            if i == self.n - 1 and j == self.m - 1:
                break
            if i == self.n - 1:
                j += 1
            elif j == self.m - 1:
                i += 1
            elif a[i] <= b[j]:
                i += 1  # ties exhaust the row first (keeps the basis a tree)
            else:
                j += 1

    def _duals(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.full(self.n, np.nan)
        v = np.full(self.m, np.nan)
        row_adj: list[list[int]] = [[] for _ in range(self.n)]
        col_adj: list[list[int]] = [[] for _ in range(self.m)]
        for i, j in self.basis:
            row_adj[i].append(j)
            col_adj[j].append(i)
        u[0] = 0.0
        stack = [(0, True)]
        while stack:
            k, is_row = stack.pop()
            if is_row:
                for j in row_adj[k]:
                    if math.isnan(v[j]):
                        v[j] = self.cost[k, j] - u[k]
                        stack.append((j, False))
            else:
                for i in col_adj[k]:
                    if math.isnan(u[i]):
                        u[i] = self.cost[i, k] - v[k]
                        stack.append((i, True))
        return u, v

    def _cycle(self, enter: tuple[int, int]) -> list[tuple[int, int]]:
        """Alternating cycle closed by the entering cell inside the basis tree."""
        row_adj: dict[int, list[int]] = {}
        col_adj: dict[int, list[int]] = {}
        for i, j in self.basis:
            row_adj.setdefault(i, []).append(j)
            col_adj.setdefault(j, []).append(i)
        ei, ej = enter
        # path in the tree from column node ej back to row node ei
        parent: dict[tuple[str, int], tuple[str, int] | None] = {("c", ej): None}
        stack = [("c", ej)]
        while stack:
            kind, k = stack.pop()
            if kind == "r" and k == ei:
                break
            neighbours = (
                [("c", j) for j in row_adj.get(k, [])] if kind == "r"
                else [("r", i) for i in col_adj.get(k, [])]
            )
            for node in neighbours:
                if node not in parent:
                    parent[node] = (kind, k)
                    stack.append(node)
        path = [("r", ei)]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        cells = [enter]
        for a, b in zip(path, path[1:]):
            (ka, xa), (kb, xb) = a, b
            cells.append((xa, xb) if ka == "r" else (xb, xa))
        return cells

    def solve(self, tol: float) -> float:
        """Pivot to optimality; returns the final worst reduced cost."""
        while True:
            u, v = self._duals()
            reduced = self.cost - u[:, None] - v[None, :]
            basic = np.zeros((self.n, self.m), dtype=bool)
            rows, cols = zip(*self.basis)
            basic[list(rows), list(cols)] = True
            candidates = np.nonzero(~basic & (reduced < -tol))
            if candidates[0].size == 0:
                return float(np.where(basic, 0.0, reduced).min())
            # Bland's rule: smallest cell index enters
            flat = candidates[0] * self.m + candidates[1]
            k = int(flat.argmin())
            enter = (int(candidates[0][k]), int(candidates[1][k]))
            cycle = self._cycle(enter)
            minus = cycle[1::2]
            theta = min(self.flow[c] for c in minus)
            # Bland's rule: smallest cell index among ties leaves
            leave = min((c for c in minus if self.flow[c] <= theta),
                        key=lambda c: c[0] * self.m + c[1])
            for idx, c in enumerate(cycle):
                self.flow[c] += theta if idx % 2 == 0 else -theta
            self.flow[leave] = 0.0
            self.basis.remove(leave)
            self.basis.append(enter)


def wasserstein(p: DiscreteDistribution, q: DiscreteDistribution,
                metric: Metric) -> tuple[float, TransportPlan]:
    """Exact type-l Wasserstein distance and an optimal basic transport plan.

    The value is reported in distance units (the 1/l root applied once);
    optimality is certified by nonnegative reduced costs at termination.
    """
    if p.dim != q.dim:
        raise ValidationError(f"dimension mismatch: {p.dim} vs {q.dim}")
    require_valid(p)
    require_valid(q)
    cost = distance_matrix(p.points, q.points, metric).entries
    scale = max(1.0, float(cost.max()))
    tableau = _Tableau(p.weights, q.weights, cost)
    worst = tableau.solve(tol=1e-13 * scale)
    if worst < -1e-9 * scale:
        raise RuntimeError(f"simplex terminated with negative reduced cost {worst}")
    total = float((tableau.flow * cost).sum())
    value = total ** (1.0 / metric.l)
    plan = TransportPlan(matrix=tableau.flow, row_marginals=p.weights.copy(),
                         col_marginals=q.weights.copy())
    return value, plan


class SupportDistance(NamedTuple):
    """Semi-discrete reduction of a distribution onto a fixed support set."""

    value: float
    labels: np.ndarray            # nearest support index per atom (full bookkeeping)
    assignment: Partition         # cells of the nonempty support points, in support order
    reduced: DiscreteDistribution # zero-mass support points dropped
    kept_support: np.ndarray      # support indices retained in `reduced`


def dist_to_support(p: DiscreteDistribution, support, metric: Metric) -> SupportDistance:
    """Smallest Wasserstein distance from `p` to distributions on `support`.

    Every atom ships to its nearest support point (ties broken by lowest
    support index); the reduced weights aggregate the shipped mass.
    """
    sup = np.atleast_2d(np.asarray(support, dtype=float))
    if sup.shape[0] == 0:
        raise ValidationError("support must be nonempty")
    if sup.shape[1] != p.dim:
        raise ValidationError(f"dimension mismatch: {sup.shape[1]} vs {p.dim}")
    dm = distance_matrix(p.points, sup, metric).entries
    labels = dm.argmin(axis=1)
    nearest = dm[np.arange(p.n), labels]
    value = float((p.weights * nearest).sum()) ** (1.0 / metric.l)
    kept = [j for j in range(sup.shape[0]) if np.any(labels == j)]
    cells = [tuple(np.nonzero(labels == j)[0]) for j in kept]
    weights = np.array([p.weights[list(c)].sum() for c in cells])
    reduced = DiscreteDistribution(sup[kept], weights)
    return SupportDistance(value=value, labels=labels,
                           assignment=Partition(cells, p.n), reduced=reduced,
                           kept_support=np.array(kept, dtype=int))
