import numpy as np
import pytest

from scenred import (ConvergenceError, Metric, ValidationError, centroid,
                     distance_matrix, enclosing_ball, geometric_median,
                     mean_point, powered_distance)
from scenred.geometry import _weiszfeld, centroid_objective, median_objective

from oracles import golden_min

METRICS = [Metric(1, 1), Metric(1, 2), Metric(1, "inf"),
           Metric(2, 1), Metric(2, 2), Metric(2, "inf")]


def test_powered_distance_examples():
    assert powered_distance([1.0, 2.0], [1.0, 2.0], Metric(2, 2)) == 0.0
    assert powered_distance([0, 0], [3, 4], Metric(2, 2)) == pytest.approx(25.0)
    assert powered_distance([0, 0], [3, 4], Metric(1, 1)) == pytest.approx(7.0)
    with pytest.raises(ValidationError):
        powered_distance([0, 0], [1, 2, 3], Metric(2, 2))


def test_powered_distance_metric_axioms(rng):
    for metric in METRICS:
        for _ in range(25):
            a, b, c = rng.normal(size=(3, 3))
            dab = powered_distance(a, b, metric)
            assert dab >= 0
            assert dab == pytest.approx(powered_distance(b, a, metric), abs=1e-12)
            assert powered_distance(a, a, metric) == 0.0
            if metric.l == 1.0:
                dac = powered_distance(a, c, metric)
                dcb = powered_distance(c, b, metric)
                assert dab <= dac + dcb + 1e-9


def test_distance_matrix_examples():
    one = distance_matrix([[1.0, 1.0]], [[1.0, 1.0]], Metric(2, 2))
    assert one.entries.shape == (1, 1) and one.entries[0, 0] == 0.0
    pts = [[0.0], [2.0]]
    sym = distance_matrix(pts, pts, Metric(1, 2)).entries
    assert np.allclose(sym, [[0, 2], [2, 0]])
    col = distance_matrix(pts, [[1.0]], Metric(2, 2)).entries
    assert np.allclose(col, [[1], [1]])


def test_distance_matrix_self_symmetry(rng):
    pts = rng.normal(size=(6, 2))
    for metric in METRICS:
        dm = distance_matrix(pts, pts, metric).entries
        assert np.allclose(dm, dm.T)
        assert np.all(np.diag(dm) == 0)
        assert np.all(dm >= 0)


def test_mean_point_examples():
    assert np.allclose(mean_point([(0, 0), (2, 0), (1, 3)]), (1, 1))
    assert np.allclose(mean_point([(4.0, 5.0)]), (4, 5))
    assert mean_point([[0.0], [10.0]], [0.9, 0.1])[0] == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        mean_point(np.empty((0, 2)))


def test_geometric_median_symmetry_cases():
    cross = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    assert np.allclose(geometric_median(cross, metric=Metric(1, 2)), 0, atol=1e-9)
    line = [[0.0], [1.0], [10.0]]
    assert geometric_median(line, metric=Metric(1, 2))[0] == pytest.approx(1.0, abs=1e-7)
    tri = [(0.0, 0.0), (4.0, 0.0), (2.0, 2.0)]
    med = geometric_median(tri, metric=Metric(1, 1))
    assert np.allclose(med, (2.0, 0.0))


def test_geometric_median_requires_l1():
    with pytest.raises(ValidationError):
        geometric_median([[0.0], [1.0]], metric=Metric(2, 2))


def test_median_beats_mean(rng):
    for metric in (Metric(1, 1), Metric(1, 2), Metric(1, "inf")):
        for _ in range(10):
            pts = rng.normal(size=(6, 2))
            w = rng.uniform(0.1, 1.0, size=6)
            med = geometric_median(pts, w, metric)
            f_med = median_objective(pts, w, med, metric.p)
            f_mean = median_objective(pts, w, mean_point(pts, w), metric.p)
            assert f_med <= f_mean + 1e-9


def test_weiszfeld_objective_monotone(rng):
    pts = rng.normal(size=(8, 3))
    w = rng.uniform(0.2, 1.0, size=8)
    trace = []
    _weiszfeld(pts, w, tol=1e-12, max_iter=500, trace=trace)
    assert len(trace) >= 2
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_weiszfeld_anchored_at_data_point():
    # the heavy atom dominates: the median is that data point exactly
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, -0.5]])
    w = np.array([10.0, 1.0, 1.0, 1.0])
    med = geometric_median(pts, w, Metric(1, 2))
    assert np.allclose(med, (0.0, 0.0))


def test_centroid_dispatch_examples():
    assert centroid([[0.0], [2.0]], metric=Metric(2, 2))[0] == pytest.approx(1.0)
    cross = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    assert np.allclose(centroid(cross, metric=Metric(1, 2)), 0, atol=1e-9)
    assert centroid([[0.0], [1.0], [10.0]], metric=Metric(1, 1))[0] == pytest.approx(1.0)


@pytest.mark.parametrize("metric", [Metric(1, 1), Metric(1, 2), Metric(1.5, 2),
                                    Metric(2, 1), Metric(3, 2)])
def test_centroid_matches_golden_section_in_1d(rng, metric):
    for _ in range(5):
        pts = rng.uniform(-2, 2, size=(6, 1))
        w = rng.uniform(0.1, 1.0, size=6)
        z = centroid(pts, w, metric, tol=1e-10)
        got = centroid_objective(pts, w, z, metric)
        _, ref = golden_min(
            lambda c: float((w * np.abs(pts[:, 0] - c) ** metric.l).sum()),
            float(pts.min()), float(pts.max()))
        assert got <= ref + 1e-6 * max(1.0, ref)


def test_centroid_singleton():
    assert np.allclose(centroid([[3.0, 4.0]], metric=Metric(1, "inf")), (3, 4))


def test_enclosing_ball_examples():
    center, radius = enclosing_ball([[1.0], [-1.0]])
    assert center[0] == pytest.approx(0.0) and radius == pytest.approx(1.0)
    center, radius = enclosing_ball([[5.0, 6.0]])
    assert radius == 0.0
    center, radius = enclosing_ball([(0.0, 0.0), (2.0, 0.0)])
    assert np.allclose(center, (1, 0)) and radius == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        enclosing_ball(np.empty((0, 2)))


def test_weiszfeld_nonconvergence_reports_best():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]])
    with pytest.raises(ConvergenceError) as err:
        _weiszfeld(pts, np.ones(3), tol=1e-30, max_iter=2)
    assert err.value.best.shape == (2,)
    assert err.value.residual > 0
