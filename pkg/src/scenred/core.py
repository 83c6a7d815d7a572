"""Shared domain types: discrete distributions, metrics, partitions, results.

All types are immutable after construction (arrays are frozen), so values can
be shared freely across threads. Construction does cheap shape checks only;
semantic invariants are reported by :func:`validate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: tolerance for checks whose operands are exactly representable
EXACT_TOL = 1e-12
#: tolerance for accumulated floating-point sums
SUM_TOL = 1e-9


class ValidationError(ValueError):
    """Raised when an operation receives an invalid distribution or metric."""


class BudgetExceededError(RuntimeError):
    """Raised when an exact solver would exceed its enumeration budget."""

    def __init__(self, required: int, budget: int, what: str = "candidates"):
        super().__init__(
            f"enumeration would require {required} {what}, exceeding the budget of {budget}"
        )
        self.required = required
        self.budget = budget


class ConvergenceError(RuntimeError):
    """Raised by iterative solvers that fail to reach tolerance.

    Carries the best iterate found (`best`) and its residual (`residual`).
    """

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.best = best
        self.residual = residual


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution: atoms in R^d with probabilities.

    `points` has shape (n, dim) and `weights` shape (n,). Weights are general
    (not forced uniform); operations that require uniformity per the theory
    check it explicitly.
    """

    points: np.ndarray
    weights: np.ndarray
    dim: int

    def __init__(self, points, weights=None, dim: int | None = None):
        pts = np.atleast_2d(np.array(points, dtype=float))
        if pts.ndim != 2:
            raise ValidationError("points must form an n x d array")
        n = pts.shape[0]
        if n == 0:
            raise ValidationError("a distribution needs at least one atom")
        if dim is None:
            dim = pts.shape[1]
        if pts.shape[1] != dim:
            raise ValidationError(f"points have length {pts.shape[1]}, expected dim {dim}")
        if weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.array(weights, dtype=float)
        if w.shape != (n,):
            raise ValidationError(f"expected {n} weights, got shape {w.shape}")
        object.__setattr__(self, "points", _frozen_array(pts))
        object.__setattr__(self, "weights", _frozen_array(w))
        object.__setattr__(self, "dim", int(dim))

    @classmethod
    def uniform(cls, points) -> "DiscreteDistribution":
        return cls(points)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def is_uniform(self, tol: float = EXACT_TOL) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.n) <= tol))

    def is_distinct(self) -> bool:
        """Exact componentwise distinctness of all atoms."""
        return len(_coincident_groups(self.points)) == 0

    def support_tuples(self):
        return [tuple(row) for row in self.points]


@dataclass(frozen=True)
class Metric:
    """Order `l >= 1` of the Wasserstein distance plus the ground p-norm.

    The ground norm selector `p` is one of 1, 2 or infinity.
    """

    l: float = 2.0
    p: float = 2.0

    def __init__(self, l: float = 2.0, p=2.0):
        lf = float(l)
        if not math.isfinite(lf) or lf < 1.0:
            raise ValidationError(f"Wasserstein order l must satisfy l >= 1, got {l}")
        if isinstance(p, str):
            if p.lower() in ("inf", "infinity"):
                pf = math.inf
            else:
                try:
                    pf = float(p)
                except ValueError:
                    raise ValidationError(f"unsupported ground norm {p!r}") from None
        else:
            pf = float(p)
        if pf not in (1.0, 2.0, math.inf):
            raise ValidationError(f"ground norm must be 1, 2 or inf, got {p}")
        object.__setattr__(self, "l", lf)
        object.__setattr__(self, "p", pf)

    @property
    def norm_name(self) -> str:
        return "inf" if math.isinf(self.p) else str(int(self.p))


@dataclass(frozen=True)
class Partition:
    """Disjoint, nonempty index cells covering range(n) exactly once."""

    cells: tuple[tuple[int, ...], ...]
    n: int

    def __init__(self, cells: Sequence[Sequence[int]], n: int):
        cells_t = tuple(tuple(int(i) for i in cell) for cell in cells)
        seen: set[int] = set()
        for cell in cells_t:
            if not cell:
                raise ValidationError("partition cells must be nonempty")
            for i in cell:
                if i < 0 or i >= n:
                    raise ValidationError(f"index {i} outside range(0, {n})")
                if i in seen:
                    raise ValidationError(f"index {i} appears in two cells")
                seen.add(i)
        if len(seen) != n:
            raise ValidationError("partition cells must cover every index")
        if len(cells_t) > n:
            raise ValidationError("more cells than indices")
        object.__setattr__(self, "cells", cells_t)
        object.__setattr__(self, "n", int(n))

    @property
    def m(self) -> int:
        return len(self.cells)

    def labels(self) -> np.ndarray:
        """Cell index of every atom, as an (n,) integer array."""
        lab = np.empty(self.n, dtype=int)
        for j, cell in enumerate(self.cells):
            lab[list(cell)] = j
        return lab


@dataclass(frozen=True)
class ReductionResult:
    """Outcome of a reduction: reduced support, probabilities and trace.

    `partition.cells[j]` lists the original atoms served by `support[j]`;
    `weights[j]` is their total original probability. `value` is the attained
    Wasserstein distance (already the l-th root). `evaluations` counts
    atom-to-candidate distance lookups performed by the algorithm.
    """

    support: np.ndarray
    weights: np.ndarray
    partition: Partition
    value: float
    algorithm: str
    iterations: int = 0
    evaluations: int = 0

    def __init__(self, support, weights, partition, value, algorithm,
                 iterations=0, evaluations=0):
        sup = np.atleast_2d(np.array(support, dtype=float))
        w = np.array(weights, dtype=float)
        if sup.shape[0] != w.shape[0]:
            raise ValidationError("support and weights must have equal length")
        if sup.shape[0] != partition.m:
            raise ValidationError("one partition cell per support point required")
        if value < 0:
            raise ValidationError("attained distance cannot be negative")
        object.__setattr__(self, "support", _frozen_array(sup))
        object.__setattr__(self, "weights", _frozen_array(w))
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "value", float(value))
        object.__setattr__(self, "algorithm", str(algorithm))
        object.__setattr__(self, "iterations", int(iterations))
        object.__setattr__(self, "evaluations", int(evaluations))

    @property
    def m(self) -> int:
        return self.support.shape[0]

    def reduced_distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.support, self.weights)


def _coincident_groups(points: np.ndarray) -> list[tuple[int, ...]]:
    groups: dict[bytes, list[int]] = {}
    for i, row in enumerate(points):
        groups.setdefault(row.tobytes(), []).append(i)
    return [tuple(g) for g in groups.values() if len(g) > 1]


def validate(dist: DiscreteDistribution, require_uniform: bool = False,
             require_distinct: bool = False, weight_tol: float = EXACT_TOL) -> list[str]:
    """Check distribution invariants; returns one message per violation.

    An empty list means the distribution is valid under the requested flags.
    This never raises: it is a pure verdict function.
    """
    problems: list[str] = []
    pts, w = dist.points, dist.weights
    if pts.shape != (dist.n, dist.dim):
        problems.append(f"points have shape {pts.shape}, expected ({dist.n}, {dist.dim})")
    if not np.all(np.isfinite(pts)):
        problems.append("points contain non-finite entries")
    if not np.all(np.isfinite(w)):
        problems.append("weights contain non-finite entries")
    else:
        negative = np.nonzero(w < 0)[0]
        if negative.size:
            problems.append(f"weight {negative[0] + 1} is negative ({w[negative[0]]:.6g})")
        total = float(w.sum())
        if abs(total - 1.0) > weight_tol:
            problems.append(f"weights sum to {total:.12g}")
        if require_uniform and np.any(np.abs(w - 1.0 / dist.n) > weight_tol):
            problems.append(f"weights are not uniform (expected 1/{dist.n} each)")
    if require_distinct:
        for group in _coincident_groups(pts):
            labels = " and ".join(str(i + 1) for i in group)
            problems.append(f"atoms {labels} coincide")
    return problems


def require_valid(dist: DiscreteDistribution, require_uniform: bool = False,
                  require_distinct: bool = False) -> None:
    """Raise :class:`ValidationError` when `validate` reports any violation."""
    problems = validate(dist, require_uniform, require_distinct)
    if problems:
        raise ValidationError("; ".join(problems))
