"""Closed-form worst-case / ratio bounds, tight and adversarial instance
generators, the a-priori support-size selector, and the normal-sampling
experiment that probes how close random instances come to the worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DiscreteDistribution, Metric, ValidationError
from .geometry import enclosing_ball
from .heuristics import k_means_generalized


@dataclass(frozen=True)
class BoundReport:
    """Worst-case distance and discrete/continuous ratio bounds for (n, m, l).

    `c_upper` bounds the reduction distance of any n-point distribution on
    the unit ball from above; `c1_lower` is the type-1 lower-bound companion.
    `kappa_upper`/`kappa_lower` sandwich the ratio of the discrete to the
    continuous optimum.
    """

    n: int
    m: int
    l: float
    reduction_factor: float
    c_upper: float
    c1_lower: float
    kappa_upper: float
    kappa_lower: float

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "l": self.l,
            "reduction_factor": self.reduction_factor,
            "c_upper": self.c_upper, "c1_lower": self.c1_lower,
            "kappa_upper": self.kappa_upper, "kappa_lower": self.kappa_lower,
        }


def limit_bounds(n: int, m: int, l: float) -> BoundReport:
    """Closed-form bound report; defined for l in {1, 2} and 1 <= m <= n."""
    if l not in (1, 2, 1.0, 2.0):
        raise ValidationError(f"bounds are available for l in {{1, 2}}, got {l}")
    if n < 1 or not 1 <= m <= n:
        raise ValidationError(f"need 1 <= m <= n, got n={n}, m={m}")
    if n == m:
        c_upper = 0.0
        c1_lower = 0.0
    else:
        c_upper = math.sqrt((n - m) / (n - 1))
        c1_lower = math.sqrt((n - m) * (n - m + 1) / (n * (n - 1)))
    if m == n:
        ku = kl = 1.0
    elif l == 2:
        ku = math.sqrt(2.0)
        kl = math.sqrt(2.0) if m == n - 1 else 1.0
    else:
        if m == n - 1:
            ku = 1.0
        elif m == 1:
            ku = 2.0 * (1.0 - 1.0 / n)
        else:
            ku = 2.0
        kl = 1.0
    return BoundReport(n=n, m=m, l=float(l), reduction_factor=m / n,
                       c_upper=c_upper, c1_lower=c1_lower,
                       kappa_upper=ku, kappa_lower=kl)


def a_priori_m(p: DiscreteDistribution, target: float, l: float = 2.0) -> int:
    """Smallest m whose worst-case bound r*sqrt((n-m)/(n-1)) meets the target.

    Uses a (not necessarily minimal) enclosing ball of the support; always
    returns a value in [1, n]. The bound covers uniform distributions with
    distinct atoms, so anything else is refused rather than extrapolated.
    """
    if target <= 0:
        raise ValidationError("target must be positive")
    if not p.is_uniform():
        raise ValidationError("the worst-case bound covers uniform distributions only")
    limit_bounds(p.n, 1, l)  # validates l
    _, radius = enclosing_ball(p.points)
    n = p.n
    if radius <= target or n == 1:
        return 1

    def bound(m: int) -> float:
        return radius * math.sqrt((n - m) / (n - 1))

    m = n - (n - 1) * (target / radius) ** 2
    m = min(n, max(1, math.ceil(m - 1e-9)))
    while m > 1 and bound(m - 1) <= target:
        m -= 1
    while m < n and bound(m) > target:
        m += 1
    return m


def gen_worst_case(n: int, d: int) -> DiscreteDistribution:
    """Uniform distribution on the unit sphere that is hardest to reduce.

    The n atoms have unit norm and pairwise inner products -1/(n-1); they are
    built in R^n and, for d = n-1, rotated onto the orthogonal complement of
    the all-ones vector via a fixed Gram-Schmidt basis, so the output is
    bit-reproducible.
    """
    if n < 2:
        raise ValidationError("need at least two atoms")
    if d < n - 1:
        raise ValidationError(f"construction needs d >= n-1, got d={d}, n={n}")
    x = math.sqrt((n - 1) / n)
    y = -1.0 / math.sqrt(n * (n - 1))
    atoms = np.full((n, n), y) + (x - y) * np.eye(n)
    if d == n - 1:
        basis = []
        for i in range(n - 1):
            v = np.zeros(n)
            v[i], v[n - 1] = 1.0, -1.0
            for b in basis:
                v = v - (v @ b) * b
            basis.append(v / np.linalg.norm(v))
        atoms = atoms @ np.array(basis).T
    elif d > n:
        atoms = np.hstack([atoms, np.zeros((n, d - n))])
    return DiscreteDistribution(atoms)


def _unit_block(count: int, d: int) -> np.ndarray:
    """`count` distinct unit-norm atoms with zero mean (antipodal pairs, plus
    an equilateral triangle when the count is odd)."""
    if count < 2:
        raise ValidationError("a zero-mean unit block needs at least 2 atoms")
    if d < 2:
        raise ValidationError("the unit block needs d >= 2")
    rows = []
    if count % 2 == 0:
        k = count // 2
        angles = [t * math.pi / k for t in range(k)]
    else:
        k = (count - 3) // 2
        angles = [math.pi * (t + 1) / (2 * (k + 1)) for t in range(k)]
        rows.extend([
            (1.0, 0.0),
            (-0.5, math.sqrt(3.0) / 2.0),
            (-0.5, -math.sqrt(3.0) / 2.0),
        ])
    for a in angles:
        rows.append((math.cos(a), math.sin(a)))
        rows.append((-math.cos(a), -math.sin(a)))
    atoms = np.zeros((count, d))
    atoms[:, :2] = np.array(rows)
    return atoms


def gen_kappa_tight(l: int, n: int, m: int, d: int | None = None,
                    M: float | None = None) -> DiscreteDistribution:
    """Instances attaining the discrete/continuous ratio bounds.

    l=2: a zero-mean block of n-m+1 unit atoms plus m-1 remote collinear
    atoms at (1+iM)e1; the ratio equals sqrt(2). l=1 (intended for the
    1-norm): m cross-polytope blocks {+-e_i}, shifted M apart along e1; the
    ratio equals 2(1-m/n). Preconditions follow the constructions: l=2 needs
    M > 2*sqrt(n-m+1); l=1 needs n divisible by 2m, d >= n/(2m), M > 2n+2.
    """
    if l == 2:
        if not 1 <= m <= n - 1:
            raise ValidationError("need 1 <= m <= n-1")
        if d is None:
            d = 2
        block = n - m + 1
        if M is None:
            M = 3.0 * math.sqrt(block)
        if M <= 2.0 * math.sqrt(block):
            raise ValidationError(f"M must exceed 2*sqrt(n-m+1) = {2*math.sqrt(block):.6g}")
        atoms = _unit_block(block, d)
        far = np.zeros((m - 1, d))
        far[:, 0] = 1.0 + M * np.arange(1, m)
        return DiscreteDistribution(np.vstack([atoms, far]))
    if l == 1:
        if not 1 <= m <= n:
            raise ValidationError("need 1 <= m <= n")
        if n % (2 * m) != 0:
            raise ValidationError(f"n must be divisible by 2m, got n={n}, m={m}")
        k = n // (2 * m)
        if d is None:
            d = max(k, 1)
        if d < k:
            raise ValidationError(f"need d >= n/(2m) = {k}")
        if M is None:
            M = 2.0 * n + 4.0
        if M <= 2 * n + 2:
            raise ValidationError(f"M must exceed 2n+2 = {2 * n + 2}")
        rows = []
        for j in range(m):
            shift = j * M
            for i in range(k):
                e = np.zeros(d)
                e[i] = 1.0
                e[0] += shift
                rows.append(e)
            for i in range(k):
                e = np.zeros(d)
                e[i] = -1.0
                e[0] += shift
                rows.append(e)
        return DiscreteDistribution(np.array(rows))
    raise ValidationError(f"tight instances exist for l in {{1, 2}}, got {l}")


def gen_adversarial(family: str, z: int, eps: float, d: int) -> DiscreteDistribution:
    """Instances on which the named heuristic is arbitrarily suboptimal.

    `dupacova`: four clusters of z atoms inside eps-balls around +-e1, +-e2
    plus an isolated atom at the origin (n = 4z+1); the greedy picks the
    origin first and then must leave one cluster unserved. `kmeans`: 2z atoms
    near -e1, z atoms near 0 and one atom at +e1 (n = 3z+1); seeding two
    centers in the big cluster traps the iteration. Cluster atoms sit on a
    deterministic lattice of spacing eps/(4z) along the cluster's own axis,
    which keeps them distinct and inside the ball under every ground norm.
    """
    if z < 1:
        raise ValidationError("z must be at least 1")
    if eps <= 0:
        raise ValidationError("eps must be positive")
    delta = eps / (4.0 * z)
    if family == "dupacova":
        if d < 2:
            raise ValidationError("the greedy construction needs d >= 2")
        rows = []
        for center_axis, sign in ((0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)):
            for t in range(z):
                v = np.zeros(d)
                v[center_axis] = sign * (1.0 + t * delta)
                rows.append(v)
        rows.append(np.zeros(d))
        return DiscreteDistribution(np.array(rows))
    if family == "kmeans":
        if eps >= 0.25:
            raise ValidationError("the k-means construction needs eps < 1/4")
        if d < 1:
            raise ValidationError("d must be positive")
        rows = []
        for t in range(2 * z):
            v = np.zeros(d)
            v[0] = -1.0 + t * delta
            rows.append(v)
        for t in range(z):
            v = np.zeros(d)
            v[0] = t * delta
            rows.append(v)
        tip = np.zeros(d)
        tip[0] = 1.0
        rows.append(tip)
        return DiscreteDistribution(np.array(rows))
    raise ValidationError(f"unknown adversarial family {family!r}")


@dataclass(frozen=True)
class ExperimentTable:
    """Mean/stddev of the ratio (attained distance / worst-case bound) per (d, m)."""

    rows: tuple[tuple[int, int, float, float, int], ...]
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["d,m,mean_ratio,std_ratio,trials"]
        for d, m, mean, std, trials in self.rows:
            lines.append(f"{d},{m},{mean:.17g},{std:.17g},{trials}")
        return "\n".join(lines) + "\n"


def normal_experiment(n: int, m_list, d_list, c: float, trials: int,
                      seed: int, restarts: int = 10) -> ExperimentTable:
    """Sample n points from N(0, (sqrt(d-1)+c)^-2 I) and compare the attained
    continuous reduction distance against the worst-case bound.

    The distance is estimated by multi-restart generalized k-means (exact
    enumeration is impossible at these sizes); the restart count is recorded
    in the table config. Each (d, trial) pair derives its own seed from the
    master seed, so results do not depend on evaluation order.
    """
    if trials < 1:
        raise ValidationError("trials must be positive")
    m_list = [int(m) for m in m_list]
    d_list = [int(d) for d in d_list]
    for m in m_list:
        if not 1 <= m <= n:
            raise ValidationError(f"m={m} outside [1, {n}]")
    metric = Metric(2, 2)
    rows = []
    ratios: dict[tuple[int, int], list[float]] = {(d, m): [] for d in d_list for m in m_list}
    for d in d_list:
        sigma = 1.0 / (math.sqrt(d - 1) + c) if d > 1 else 1.0 / c
        for trial in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([seed, d, trial]))
            pts = rng.normal(0.0, sigma, size=(n, d))
            dist = DiscreteDistribution(pts)
            for m in m_list:
                best = math.inf
                for r in range(restarts):
                    init_seed = int(np.random.SeedSequence(
                        [seed, d, trial, 7, r]).generate_state(1)[0])
                    run = k_means_generalized(dist, m, metric, init=init_seed)
                    best = min(best, run.value)
                ratios[(d, m)].append(best / limit_bounds(n, m, 2).c_upper)
    for d in d_list:
        for m in m_list:
            vals = np.array(ratios[(d, m)])
            rows.append((d, m, float(vals.mean()), float(vals.std()), trials))
    return ExperimentTable(rows=tuple(rows), config={
        "n": n, "c": c, "seed": seed, "trials": trials, "restarts": restarts,
        "estimator": "k_means_generalized multi-restart (upper bound on the optimum)",
    })
