"""Exponential-time exact reduction solvers and mixed-integer model export.

`discrete_exact` searches all m-subsets of the support with a lexicographic
branch-and-bound whose lower bound only ever discards provably dominated
branches, so the reported minimizer equals the one plain enumeration would
find. `continuous_exact` enumerates set partitions through restricted growth
strings (with a dynamic program replacing the enumeration in dimension one,
where optimal cells are contiguous). There is no embedded MILP solver: the
mixed-integer formulations are exported as solver-ready CPLEX-LP files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .core import (BudgetExceededError, DiscreteDistribution, Metric,
                   Partition, ReductionResult, ValidationError)
from .geometry import centroid, centroid_objective, distance_matrix
from .transport import dist_to_support


def _support_result(p: DiscreteDistribution, support, metric: Metric,
                    algorithm: str, iterations: int = 0,
                    evaluations: int = 0) -> ReductionResult:
    sd = dist_to_support(p, support, metric)
    return ReductionResult(support=sd.reduced.points, weights=sd.reduced.weights,
                           partition=sd.assignment, value=sd.value,
                           algorithm=algorithm, iterations=iterations,
                           evaluations=evaluations)


def stirling2(n: int, m: int) -> int:
    """Number of partitions of an n-set into exactly m nonempty cells."""
    if m < 0 or m > n:
        return 0
    row = [1] + [0] * m
    for i in range(1, n + 1):
        new = [0] * (m + 1)
        for j in range(1, min(i, m) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[m]


def _check_m(n: int, m: int) -> None:
    if not 1 <= m <= n:
        raise ValidationError(f"m must lie in [1, {n}], got {m}")


def _match_support_indices(points: np.ndarray, support: np.ndarray) -> list[int]:
    lookup: dict[bytes, int] = {}
    for i, row in enumerate(points):
        lookup.setdefault(row.tobytes(), i)
    out = []
    for row in support:
        key = np.asarray(row, dtype=float).tobytes()
        if key not in lookup:
            raise ValidationError("support point is not an atom of the distribution")
        out.append(lookup[key])
    return out


def discrete_exact(p: DiscreteDistribution, m: int, metric: Metric,
                   budget: int = 10**7) -> ReductionResult:
    """Globally optimal reduction onto an m-subset of the support.

    Enumerates subsets in lexicographic index order inside a branch-and-bound
    (suffix-minimum completion bound, warm-started from greedy + local
    search); ties resolve to the lexicographically smallest index subset.
    `budget` caps the worst-case subset count C(n, m).
    """
    from .heuristics import dupacova_greedy, local_search

    n = p.n
    _check_m(n, m)
    required = math.comb(n, m)
    if required > budget:
        raise BudgetExceededError(required, budget, "support subsets")
    if m == n:
        return _support_result(p, p.points, metric, "discrete_exact", evaluations=n)

    dm = distance_matrix(p.points, p.points, metric).entries
    w = p.weights
    # sufmin[:, t] = cheapest way to serve each atom using only supports >= t
    sufmin = np.full((n, n + 1), np.inf)
    for t in range(n - 1, -1, -1):
        sufmin[:, t] = np.minimum(sufmin[:, t + 1], dm[:, t])

    warm = local_search(p, m, metric, init=dupacova_greedy(p, m, metric))
    warm_idx = sorted(set(_match_support_indices(p.points, warm.support)))
    for j in range(n):  # duplicate atoms can collapse the warm subset below m
        if len(warm_idx) == m:
            break
        if j not in warm_idx:
            warm_idx.append(j)
    warm_idx.sort()
    state = {
        "cost": float(w @ np.min(dm[:, warm_idx], axis=1)),
        "subset": list(warm_idx),
        "from_search": False,
        "evals": 0,
    }
    band = 1.0 + 1e-12  # keeps exact ties reachable so the lex rule decides them

    def visit(start: int, chosen: list[int], near: np.ndarray) -> None:
        depth = len(chosen)
        if depth == m - 1:
            block = np.minimum(near[:, None], dm[:, start:])
            costs = w @ block
            state["evals"] += (n - start) * n
            k = int(costs.argmin())
            c = float(costs[k])
            if c < state["cost"] or (c == state["cost"] and not state["from_search"]):
                state["cost"] = c
                state["subset"] = chosen + [start + k]
                state["from_search"] = True
            return
        for j in range(start, n - (m - depth - 1)):
            child = np.minimum(near, dm[:, j])
            lb = float(w @ np.minimum(child, sufmin[:, j + 1]))
            state["evals"] += n
            if lb > state["cost"] * band:
                continue
            visit(j + 1, chosen + [j], child)

    visit(0, [], np.full(n, np.inf))
    support = p.points[state["subset"]]
    return _support_result(p, support, metric, "discrete_exact",
                           evaluations=state["evals"])


def _weighted_lower_median_cost(x: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    cum = np.cumsum(ws)
    total = cum[-1]
    if total <= 0:
        return float(xs[0]), 0.0
    idx = int(np.searchsorted(cum, 0.5 * total - 1e-15 * total))
    idx = min(idx, len(xs) - 1)
    med = float(xs[idx])
    cost = float((ws * np.abs(xs - med)).sum())
    return med, cost


def _cell_cost_l2(pts: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, float]:
    total = w.sum()
    if total <= 0:
        return pts[0].copy(), 0.0
    mean = (w[:, None] * pts).sum(axis=0) / total
    cost = float((w * ((pts - mean) ** 2).sum(axis=1)).sum())
    return mean, cost


def _cell_cost_l1p1(pts: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, float]:
    center = np.empty(pts.shape[1])
    cost = 0.0
    for k in range(pts.shape[1]):
        med, ck = _weighted_lower_median_cost(pts[:, k], w)
        center[k] = med
        cost += ck
    return center, cost


def _cell_solver(metric: Metric, tol: float):
    if metric.l == 2.0 and metric.p == 2.0:
        return _cell_cost_l2, True
    if metric.l == 1.0 and metric.p == 1.0:
        return _cell_cost_l1p1, True

    def generic(pts: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, float]:
        z = centroid(pts, w, metric, tol)
        return z, centroid_objective(pts, w, z, metric)

    return generic, False


def _interval_cost_1d(x, w, lo, hi, l, tol):
    """Optimal center and cost of atoms x[lo:hi] on the line, order l."""
    xs, ws = x[lo:hi], w[lo:hi]
    if l == 2.0:
        total = ws.sum()
        if total <= 0:
            return float(xs[0]), 0.0
        mean = float((ws * xs).sum() / total)
        return mean, float((ws * (xs - mean) ** 2).sum())
    if l == 1.0:
        return _weighted_lower_median_cost(xs, ws)
    # generic l: the objective is convex in the center, so golden-section works
    a, b = float(xs[0]), float(xs[-1])
    phi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(c):
        return float((ws * np.abs(xs - c) ** l).sum())

    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > max(tol, 1e-14) * max(1.0, abs(a), abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    center = 0.5 * (a + b)
    return center, f(center)


def _continuous_exact_1d(p: DiscreteDistribution, m: int, metric: Metric,
                         tol: float) -> ReductionResult:
    """Dynamic program over contiguous cells of the sorted atoms (exact in 1-D)."""
    n = p.n
    order = np.argsort(p.points[:, 0], kind="stable")
    x = p.points[order, 0]
    w = p.weights[order]
    costs: dict[tuple[int, int], tuple[float, float]] = {}

    def cc(a: int, b: int) -> float:
        key = (a, b)
        if key not in costs:
            costs[key] = _interval_cost_1d(x, w, a, b, metric.l, tol)
        return costs[key][1]

    inf = math.inf
    best = np.full((m + 1, n + 1), inf)
    best[0, 0] = 0.0
    split = np.zeros((m + 1, n + 1), dtype=int)
    for j in range(1, m + 1):
        for i in range(j, n - (m - j) + 1):
            lo = j - 1
            options = [best[j - 1, t] + cc(t, i) for t in range(lo, i)]
            k = int(np.argmin(options))
            best[j, i] = options[k]
            split[j, i] = lo + k

    cells = []
    centers = []
    i = n
    for j in range(m, 0, -1):
        t = split[j, i]
        cells.append(tuple(int(v) for v in order[t:i]))
        centers.append(costs[(t, i)][0])
        i = t
    cells.reverse()
    centers.reverse()
    support = np.array(centers)[:, None]
    weights = np.array([p.weights[list(c)].sum() for c in cells])
    value = float(best[m, n]) ** (1.0 / metric.l)
    return ReductionResult(support=support, weights=weights,
                           partition=Partition(cells, n), value=value,
                           algorithm="continuous_exact", iterations=0,
                           evaluations=len(costs))


def continuous_exact(p: DiscreteDistribution, m: int, metric: Metric,
                     tol: float = 1e-9, budget: int = 10**7) -> ReductionResult:
    """Globally optimal reduction with freely placed support points.

    Enumerates all partitions of the atoms into exactly m nonempty cells via
    restricted growth strings, pricing each cell at its centroid; partial
    partitions whose accumulated cost already reaches the incumbent are
    pruned. Exact for (l=2, p=2) and (l=1, p=1); accurate to the centroid
    tolerance otherwise (partition ties then prefer the lexicographically
    smaller growth string, with a 10*tol margin). In dimension one the
    enumeration is replaced by an exact dynamic program over contiguous
    cells, which has no enumeration budget.
    """
    n = p.n
    _check_m(n, m)
    if p.dim == 1:
        return _continuous_exact_1d(p, m, metric, tol)
    required = stirling2(n, m)
    if required > budget:
        raise BudgetExceededError(required, budget, "partitions")

    solver, closed_form = _cell_solver(metric, tol)
    margin = 0.0 if closed_form else 10.0 * tol
    pts, w = p.points, p.weights
    memo: dict[int, float] = {}

    def cell_cost(mask: int, members: list[int]) -> float:
        if mask not in memo:
            idx = list(members)
            memo[mask] = solver(pts[idx], w[idx])[1]
        return memo[mask]

    best_cost = math.inf
    best_assign: np.ndarray | None = None
    assign = np.zeros(n, dtype=int)
    members: list[list[int]] = [[] for _ in range(m)]
    masks = [0] * m
    cell_costs = [0.0] * m
    leaves = 0

    def rec(i: int, k: int, partial: float) -> None:
        nonlocal best_cost, best_assign, leaves
        if partial >= best_cost - margin:
            return  # cannot improve; ties keep the earlier (lex-smaller) growth string
        if i == n:
            if k == m:
                leaves += 1
                best_cost = partial
                best_assign = assign.copy()
            return
        top = min(k + 1, m)
        for c in range(top):
            opening = 1 if c == k else 0
            if (m - (k + opening)) > (n - i - 1):
                continue
            old_cost = cell_costs[c]
            old_mask = masks[c]
            members[c].append(i)
            masks[c] |= 1 << i
            new_cost = cell_cost(masks[c], members[c])
            cell_costs[c] = new_cost
            assign[i] = c
            rec(i + 1, k + opening, partial + (new_cost - old_cost))
            members[c].pop()
            masks[c] = old_mask
            cell_costs[c] = old_cost

    rec(0, 0, 0.0)
    if best_assign is None:
        raise RuntimeError("partition enumeration found no feasible partition")
    cells = [tuple(int(i) for i in np.nonzero(best_assign == c)[0]) for c in range(m)]
    centers, total = [], 0.0
    for cell in cells:
        idx = list(cell)
        z, cost = solver(pts[idx], w[idx])
        centers.append(z)
        total += cost
    weights = np.array([w[list(c)].sum() for c in cells])
    return ReductionResult(support=np.array(centers), weights=weights,
                           partition=Partition(cells, n),
                           value=total ** (1.0 / metric.l),
                           algorithm="continuous_exact", iterations=0,
                           evaluations=leaves + len(memo))


# --------------------------------------------------------------------------
# Mixed-integer model export (CPLEX LP text; no solver embedded)
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    value = float(x)
    if value == 0.0:
        value = 0.0  # never print the sign of a negative zero
    return format(value, ".17g")


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=" or "="
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Linear objective/constraints with binary markers and variable bounds."""

    name: str
    variables: tuple[str, ...]
    objective: tuple[tuple[str, float], ...]
    constraints: tuple[LinearConstraint, ...]
    binaries: tuple[str, ...]
    bounds: tuple[tuple[str, float, float], ...] = ()
    big_M: float | None = None
    comments: tuple[str, ...] = ()

    def objective_value(self, assignment: Mapping[str, float]) -> float:
        return sum(c * assignment.get(v, 0.0) for v, c in self.objective)

    def max_violation(self, assignment: Mapping[str, float]) -> float:
        """Largest constraint/bound/integrality violation at the point."""
        worst = 0.0
        for con in self.constraints:
            lhs = sum(c * assignment.get(v, 0.0) for v, c in con.coeffs)
            if con.sense == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.sense == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        for v, lo, hi in self.bounds:
            val = assignment.get(v, 0.0)
            worst = max(worst, lo - val, val - hi)
        for v in self.binaries:
            val = assignment.get(v, 0.0)
            worst = max(worst, abs(val - round(val)), -val, val - 1.0)
        return worst

    def to_lp_text(self) -> str:
        return render_lp(self)


def _render_terms(coeffs: tuple[tuple[str, float], ...]) -> list[str]:
    parts: list[str] = []
    for idx, (var, coef) in enumerate(coeffs):
        if idx == 0:
            prefix = "-" if coef < 0 else ""
            parts.append(f"{prefix}{_fmt(abs(coef))} {var}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {_fmt(abs(coef))} {var}")
    return parts


def _wrap(lead: str, parts: list[str], width: int = 200) -> list[str]:
    lines = [lead]
    for part in parts:
        if len(lines[-1]) + len(part) + 1 > width:
            lines.append("   " + part)
        else:
            lines[-1] += " " + part
    return lines


def render_lp(model: MilpModel) -> str:
    """Deterministic CPLEX-LP rendering: 17 significant digits, LF endings."""
    lines: list[str] = [f"\\ {c}" for c in model.comments]
    lines.append("Minimize")
    lines.extend(_wrap(" obj:", _render_terms(model.objective)))
    lines.append("Subject To")
    for con in model.constraints:
        parts = _render_terms(con.coeffs) + [con.sense, _fmt(con.rhs)]
        lines.extend(_wrap(f" {con.name}:", parts))
    lines.append("Bounds")
    for var, lo, hi in model.bounds:
        lines.append(f" {_fmt(lo)} <= {var} <= {_fmt(hi)}")
    if model.binaries:
        lines.append("Binaries")
        lines.extend(_wrap("", list(model.binaries)))
    lines.append("End")
    return "\n".join(lines) + "\n"


class MilpExport(NamedTuple):
    model: MilpModel
    text: str


def export_milp_discrete(p: DiscreteDistribution, m: int, metric: Metric) -> MilpExport:
    """MILP whose optimum is the l-th power of the discrete reduction distance.

    Shipping variables pi_i_j are row-stochastic, lambda_j switches atom j
    into the reduced support, and the objective weighs each row by the atom's
    probability (the uniform model divides by n instead; the generalization
    is noted in the file header).
    """
    n = p.n
    _check_m(n, m)
    dm = distance_matrix(p.points, p.points, metric).entries
    w = p.weights
    pi = [[f"pi_{i + 1}_{j + 1}" for j in range(n)] for i in range(n)]
    lam = [f"lambda_{j + 1}" for j in range(n)]
    variables = tuple(v for row in pi for v in row) + tuple(lam)
    objective = tuple((pi[i][j], float(w[i] * dm[i, j]))
                      for i in range(n) for j in range(n))
    constraints: list[LinearConstraint] = []
    for i in range(n):
        constraints.append(LinearConstraint(
            name=f"ship_{i + 1}",
            coeffs=tuple((pi[i][j], 1.0) for j in range(n)),
            sense="=", rhs=1.0))
    for i in range(n):
        for j in range(n):
            constraints.append(LinearConstraint(
                name=f"link_{i + 1}_{j + 1}",
                coeffs=((pi[i][j], 1.0), (lam[j], -1.0)),
                sense="<=", rhs=0.0))
    constraints.append(LinearConstraint(
        name="choose", coeffs=tuple((v, 1.0) for v in lam), sense="=", rhs=float(m)))
    model = MilpModel(
        name="discrete_reduction",
        variables=variables,
        objective=objective,
        constraints=tuple(constraints),
        binaries=tuple(lam),
        comments=(
            f"discrete scenario reduction MILP: n={n}, m={m}, order l={_fmt(metric.l)}, "
            f"ground norm p={metric.norm_name}",
            "objective rows are weighted by atom probabilities "
            "(generalizes the uniform 1/n objective)",
        ),
    )
    return MilpExport(model, render_lp(model))


def export_milp_continuous(p: DiscreteDistribution, m: int, metric: Metric) -> MilpExport:
    """Big-M MILP for continuous reduction (type-1 distance, 1- or inf-norm).

    Other (l, p) combinations lead to mixed-integer second-order cone models,
    which have no portable text format and are rejected.
    """
    n, d = p.n, p.dim
    _check_m(n, m)
    if metric.l != 1.0 or metric.p not in (1.0, math.inf):
        raise ValidationError(
            "continuous model exports as an MILP only for l=1 with the 1- or inf-norm; "
            "other orders/norms need a mixed-integer second-order cone solver")
    dm = distance_matrix(p.points, p.points, metric).entries
    big_m = float(dm.max())
    w = p.weights
    xs = p.points
    pi = [[f"pi_{i + 1}_{j + 1}" for j in range(m)] for i in range(n)]
    cvar = [f"c_{i + 1}" for i in range(n)]
    zeta = [[f"zeta_{j + 1}_{k + 1}" for k in range(d)] for j in range(m)]
    variables: list[str] = [v for row in pi for v in row]
    variables += cvar
    variables += [v for row in zeta for v in row]
    constraints: list[LinearConstraint] = []
    for i in range(n):
        constraints.append(LinearConstraint(
            name=f"assign_{i + 1}",
            coeffs=tuple((pi[i][j], 1.0) for j in range(m)),
            sense="=", rhs=1.0))
    phi_vars: list[str] = []
    for i in range(n):
        for j in range(m):
            if metric.p == 1.0:
                phis = [f"phi_{i + 1}_{j + 1}_{k + 1}" for k in range(d)]
                for k in range(d):
                    constraints.append(LinearConstraint(
                        name=f"abs_pos_{i + 1}_{j + 1}_{k + 1}",
                        coeffs=((phis[k], 1.0), (zeta[j][k], 1.0)),
                        sense=">=", rhs=float(xs[i, k])))
                    constraints.append(LinearConstraint(
                        name=f"abs_neg_{i + 1}_{j + 1}_{k + 1}",
                        coeffs=((phis[k], 1.0), (zeta[j][k], -1.0)),
                        sense=">=", rhs=float(-xs[i, k])))
                epi = tuple((ph, 1.0) for ph in phis)
            else:
                phis = [f"phi_{i + 1}_{j + 1}"]
                for k in range(d):
                    constraints.append(LinearConstraint(
                        name=f"sup_pos_{i + 1}_{j + 1}_{k + 1}",
                        coeffs=((phis[0], 1.0), (zeta[j][k], 1.0)),
                        sense=">=", rhs=float(xs[i, k])))
                    constraints.append(LinearConstraint(
                        name=f"sup_neg_{i + 1}_{j + 1}_{k + 1}",
                        coeffs=((phis[0], 1.0), (zeta[j][k], -1.0)),
                        sense=">=", rhs=float(-xs[i, k])))
                epi = ((phis[0], 1.0),)
            constraints.append(LinearConstraint(
                name=f"epi_{i + 1}_{j + 1}",
                coeffs=epi + ((cvar[i], -1.0), (pi[i][j], big_m)),
                sense="<=", rhs=big_m))
            phi_vars.extend(phis)
    variables += phi_vars
    lo, hi = xs.min(axis=0), xs.max(axis=0)
    bounds = tuple((zeta[j][k], float(lo[k]), float(hi[k]))
                   for j in range(m) for k in range(d))
    model = MilpModel(
        name="continuous_reduction",
        variables=tuple(variables),
        objective=tuple((cvar[i], float(w[i])) for i in range(n)),
        constraints=tuple(constraints),
        binaries=tuple(v for row in pi for v in row),
        bounds=bounds,
        big_M=big_m,
        comments=(
            f"continuous scenario reduction big-M MILP: n={n}, m={m}, d={d}, "
            f"type-1 distance, ground norm p={metric.norm_name}",
            f"big-M equals the support diameter {_fmt(big_m)}; "
            "free support points are boxed by the data bounding box",
            "objective rows are weighted by atom probabilities "
            "(generalizes the uniform 1/n objective)",
        ),
    )
    return MilpExport(model, render_lp(model))
