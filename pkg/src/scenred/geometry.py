"""Ground-norm distances, powered distance matrices and cell-centroid solvers.

The centroid of a cell is the point minimizing the weighted sum of l-th
powers of ground-norm distances to the cell's atoms. For (l=2, p=2) this is
the weighted mean, for l=1 a geometric median; every other supported
combination falls back to projected subgradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, Metric, ValidationError


def _ground_norms(diff: np.ndarray, p: float) -> np.ndarray:
    """p-norm along the last axis."""
    if p == 1.0:
        return np.abs(diff).sum(axis=-1)
    if p == 2.0:
        return np.sqrt((diff * diff).sum(axis=-1))
    return np.abs(diff).max(axis=-1)


def powered_distance(a, b, metric: Metric) -> float:
    """||a - b||_p^l for the metric's ground norm p and order l."""
    av, bv = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if av.shape != bv.shape:
        raise ValidationError(f"dimension mismatch: {av.shape} vs {bv.shape}")
    d = float(_ground_norms(av - bv, metric.p))
    return d ** metric.l


@dataclass(frozen=True)
class DistanceMatrix:
    """Powered distances between two point sets: entries[i, j] = ||a_i - b_j||^l."""

    entries: np.ndarray
    metric: Metric


def distance_matrix(points_a, points_b, metric: Metric) -> DistanceMatrix:
    pa = np.atleast_2d(np.asarray(points_a, dtype=float))
    pb = np.atleast_2d(np.asarray(points_b, dtype=float))
    if pa.shape[1] != pb.shape[1]:
        raise ValidationError(
            f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    diff = pa[:, None, :] - pb[None, :, :]
    dist = _ground_norms(diff, metric.p)
    entries = dist if metric.l == 1.0 else dist ** metric.l
    entries = np.ascontiguousarray(entries)
    entries.setflags(write=False)
    return DistanceMatrix(entries=entries, metric=metric)


def _positive_weights(points, weights):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValidationError("empty point set")
    if weights is None:
        w = np.full(pts.shape[0], 1.0 / pts.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValidationError("weights must be nonnegative with positive sum")
    return pts, w


def mean_point(points, weights=None) -> np.ndarray:
    """Weighted arithmetic mean of a point set."""
    pts, w = _positive_weights(points, weights)
    return (w[:, None] * pts).sum(axis=0) / w.sum()


def median_objective(points, weights, z, p: float) -> float:
    pts, w = _positive_weights(points, weights)
    return float((w * _ground_norms(pts - np.asarray(z, dtype=float), p)).sum())


def _weighted_lower_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Smallest value whose cumulative weight reaches half the total."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = 0.5 * cum[-1]
    idx = int(np.searchsorted(cum, half - 1e-15 * cum[-1]))
    return float(values[order[min(idx, len(values) - 1)]])


def _weiszfeld(pts: np.ndarray, w: np.ndarray, tol: float, max_iter: int,
               trace: list | None = None) -> np.ndarray:
    """Damped Weiszfeld iteration for the Euclidean geometric median.

    When the iterate lands on a data point k, the subgradient condition
    ||sum_{i != k} w_i (x_i - x_k)/||x_i - x_k|| || <= w_k certifies optimality;
    otherwise we step away along the improving direction (Vardi-Zhang step).
    `trace`, when given, collects the objective value of every iterate.
    """
    scale = max(1.0, float(_ground_norms(pts - pts.mean(axis=0), 2.0).max()))
    # a data point is optimal iff its pull from the rest is at most its own
    # weight; checking this first settles every anchored instance exactly
    for k in range(pts.shape[0]):
        diff = pts - pts[k]
        dist = _ground_norms(diff, 2.0)
        others = dist > 1e-14 * scale
        anchored = float(w[~others].sum())  # total weight sitting at this point
        r_vec = (w[others, None] * diff[others] / dist[others, None]).sum(axis=0)
        if float(np.linalg.norm(r_vec)) <= anchored + 1e-14:
            return pts[k].copy()
    z = (w[:, None] * pts).sum(axis=0) / w.sum()
    best = z
    best_obj = median_objective(pts, w, z, 2.0)
    if trace is not None:
        trace.append(best_obj)
    residual = math.inf
    for _ in range(max_iter):
        diff = pts - z
        dist = _ground_norms(diff, 2.0)
        on_point = np.nonzero(dist <= 1e-14 * scale)[0]
        if on_point.size:
            k = int(on_point[0])
            others = dist > 1e-14 * scale
            r_vec = (w[others, None] * diff[others] / dist[others, None]).sum(axis=0)
            r_norm = float(np.linalg.norm(r_vec))
            if r_norm <= w[k] + 1e-15:
                return pts[k].copy()
            denom = float((w[others] / dist[others]).sum())
            z = z + (r_vec / r_norm) * ((r_norm - w[k]) / denom)
            continue
        inv = w / dist
        z_new = (inv[:, None] * pts).sum(axis=0) / inv.sum()
        grad = -(inv[:, None] * diff).sum(axis=0)
        residual = float(np.linalg.norm(grad)) * float(dist.max())
        obj = median_objective(pts, w, z_new, 2.0)
        if trace is not None:
            trace.append(obj)
        if obj <= best_obj:
            best, best_obj = z_new, obj
        if residual <= tol:
            return z_new
        if float(_ground_norms(z_new - z, 2.0)) <= 1e-16 * scale:
            return z_new
        z = z_new
    if residual <= math.sqrt(tol):
        return best
    raise ConvergenceError("Weiszfeld iteration did not converge", best, residual)


def _subgradient_descent(pts, w, metric: Metric, tol, max_iter, start=None):
    """Projected subgradient descent on sum_i w_i ||x_i - z||_p^l.

    Iterates are projected onto the data bounding box, which contains every
    minimizer. Returns the best iterate seen.
    """
    l, p = metric.l, metric.p
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    z = mean_point(pts, w) if start is None else np.asarray(start, dtype=float).copy()
    scale = max(float(_ground_norms(hi - lo, 2.0)), 1e-30)

    def objective(zz):
        return float((w * _ground_norms(pts - zz, p) ** l).sum())

    def subgrad(zz):
        diff = zz - pts
        dist = _ground_norms(diff, p)
        g = np.zeros_like(zz)
        for i in range(pts.shape[0]):
            if dist[i] <= 1e-15 * scale:
                continue
            if p == 2.0:
                gn = diff[i] / dist[i]
            elif p == 1.0:
                gn = np.sign(diff[i])
            else:
                gn = np.zeros_like(zz)
                k = int(np.argmax(np.abs(diff[i])))
                gn[k] = np.sign(diff[i][k])
            g += w[i] * l * dist[i] ** (l - 1.0) * gn
        return g

    best = z.copy()
    best_obj = objective(z)
    # Polyak steps toward the target level (best - gap); halve the gap when
    # progress stalls, so the iterates home in on the minimum
    gap = max(best_obj * 0.25, tol)
    stall = 0
    for _ in range(max_iter):
        obj = objective(z)
        if obj < best_obj - 1e-16 * (1.0 + abs(best_obj)):
            best, best_obj = z.copy(), obj
            stall = 0
        else:
            stall += 1
            if stall >= 5:
                gap *= 0.5
                stall = 0
                z = best.copy()
                obj = best_obj
        g = subgrad(z)
        gnorm2 = float(g @ g)
        if gnorm2 * scale * scale <= tol * tol or gap <= tol * 1e-3:
            break
        step = (obj - (best_obj - gap)) / gnorm2
        z = np.clip(z - step * g, lo, hi)
    return best


def geometric_median(points, weights=None, metric: Metric = Metric(1, 2),
                     tol: float = 1e-10, max_iter: int = 2000) -> np.ndarray:
    """Minimizer of the weighted sum of ground-norm distances (requires l=1).

    p=1 is solved exactly by weighted coordinatewise lower medians; p=2 by
    damped Weiszfeld iteration; p=inf by subgradient descent. Non-uniqueness
    (e.g. even collinear sets) is resolved deterministically by the lower
    median / the iteration limit.
    """
    if metric.l != 1.0:
        raise ValidationError("geometric_median requires metric order l = 1")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    pts, w = _positive_weights(points, weights)
    if pts.shape[0] == 1:
        return pts[0].copy()
    if metric.p == 1.0:
        return np.array([
            _weighted_lower_median(pts[:, k], w) for k in range(pts.shape[1])
        ])
    if metric.p == 2.0:
        return _weiszfeld(pts, w, tol, max_iter)
    return _subgradient_descent(pts, w, metric, tol, max_iter)


def centroid(points, weights=None, metric: Metric = Metric(2, 2),
             tol: float = 1e-10) -> np.ndarray:
    """Cell centroid: argmin_z sum_i w_i ||x_i - z||_p^l.

    Dispatch: (l=2, p=2) -> weighted mean (exact); l=1 -> geometric median;
    anything else -> projected subgradient descent from the mean.
    """
    pts, w = _positive_weights(points, weights)
    if pts.shape[0] == 1:
        return pts[0].copy()
    if metric.l == 2.0 and metric.p == 2.0:
        return mean_point(pts, w)
    if metric.l == 1.0:
        return geometric_median(pts, w, metric, tol)
    return _subgradient_descent(pts, w, metric, tol, max_iter=3000)


def centroid_objective(points, weights, z, metric: Metric) -> float:
    """Weighted sum of powered distances from atoms to z."""
    pts, w = _positive_weights(points, weights)
    return float((w * _ground_norms(pts - np.asarray(z, dtype=float), metric.p) ** metric.l).sum())


def enclosing_ball(points) -> tuple[np.ndarray, float]:
    """A valid (not necessarily minimal) enclosing ball: mean center, max radius."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValidationError("empty point set")
    center = pts.mean(axis=0)
    radius = float(_ground_norms(pts - center, 2.0).max())
    return center, radius
