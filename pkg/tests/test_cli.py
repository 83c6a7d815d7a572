import json
import math

import numpy as np
import pytest

from scenred import DiscreteDistribution, bundled_image, write_ppm
from scenred.cli import main, read_distribution, write_distribution


def run(*argv):
    return main([str(a) for a in argv])


def test_bounds_stdout(capsys):
    assert run("bounds", "--n", 100, "--m", 10, "--l", 2) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["c_upper"] == pytest.approx(0.9534626, abs=1e-7)
    assert doc["kappa_upper"] == pytest.approx(math.sqrt(2))


def test_gen_reduce_pipeline(tmp_path, capsys):
    gen_file = tmp_path / "kappa.json"
    out_file = tmp_path / "red.json"
    assert run("gen", "--family", "kappa1", "--n", 4, "--m", 1,
               "--out", gen_file) == 0
    assert run("reduce", "--input", gen_file, "--m", 1,
               "--algo", "exact-discrete", "--l", 1, "--norm", "1",
               "--out", out_file) == 0
    doc = json.loads(out_file.read_text())
    assert doc["value"] == pytest.approx(1.5, abs=1e-12)
    assert doc["algorithm"] == "discrete_exact"
    assert doc["seed"] == 0
    assert len(doc["support"]) == 1


def test_distance_of_identical_files(tmp_path, capsys):
    f = tmp_path / "wc.json"
    plan = tmp_path / "plan.csv"
    assert run("gen", "--family", "worst-case", "--n", 3, "--out", f) == 0
    assert run("distance", "--p", f, "--q", f, "--l", 2, "--norm", "2",
               "--plan", plan) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0
    lines = plan.read_text().splitlines()
    assert lines[0] == "i,j,mass"
    assert len(lines) == 4  # diagonal plan


def test_distribution_file_roundtrip(tmp_path):
    dist = DiscreteDistribution([[math.pi, -1 / 3], [0.1, 2.0 / 7.0]], [0.25, 0.75])
    path = tmp_path / "dist.json"
    write_distribution(dist, path)
    back = read_distribution(path)
    assert np.array_equal(back.points, dist.points)
    assert np.array_equal(back.weights, dist.weights)
    again = tmp_path / "dist2.json"
    write_distribution(back, again)
    assert path.read_bytes() == again.read_bytes()


def test_distribution_csv_roundtrip(tmp_path):
    dist = DiscreteDistribution([[1.5, 2.5], [3.0, -4.0]], [0.4, 0.6])
    path = tmp_path / "dist.csv"
    write_distribution(dist, path)
    assert path.read_text().splitlines()[0] == "x1,x2,weight"
    back = read_distribution(path)
    assert np.array_equal(back.points, dist.points)
    assert np.array_equal(back.weights, dist.weights)


def test_distribution_csv_uniform_without_weight_column(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("x1,x2\n0,0\n1,0\n0,1\n")
    back = read_distribution(path)
    assert back.n == 3
    assert np.allclose(back.weights, 1 / 3)


def test_reduce_deterministic_output(tmp_path):
    src = tmp_path / "src.json"
    write_distribution(DiscreteDistribution(
        np.random.default_rng(3).normal(size=(8, 2))), src)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out1, out2):
        assert run("reduce", "--input", src, "--m", 3, "--algo", "kmeans",
                   "--l", 2, "--norm", "2", "--seed", 42, "--out", out) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_reduce_all_algorithms(tmp_path):
    src = tmp_path / "src.json"
    write_distribution(DiscreteDistribution(
        np.random.default_rng(9).normal(size=(6, 2))), src)
    values = {}
    for algo in ("dupacova", "kmeans", "local", "local-warm",
                 "exact-discrete", "exact-continuous"):
        out = tmp_path / f"{algo}.json"
        assert run("reduce", "--input", src, "--m", 2, "--algo", algo,
                   "--l", 2, "--norm", "2", "--out", out) == 0
        values[algo] = json.loads(out.read_text())["value"]
    assert values["exact-continuous"] <= values["exact-discrete"] + 1e-9
    assert values["local-warm"] <= values["dupacova"] + 1e-9
    for algo in ("dupacova", "local", "local-warm"):
        assert values[algo] >= values["exact-discrete"] - 1e-9


def test_exit_code_usage_error(tmp_path):
    assert run("reduce", "--input", tmp_path / "missing.json", "--m", 1,
               "--algo", "dupacova", "--out", tmp_path / "x.json") == 2
    # incomplete family parameters are usage errors too
    assert run("gen", "--family", "kappa1", "--n", 4,
               "--out", tmp_path / "k.json") == 2


def test_exit_code_validation_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "points": [[0.0], [1.0]], "weights": [0.5, 0.6]}')
    assert run("reduce", "--input", bad, "--m", 1, "--algo", "dupacova",
               "--out", tmp_path / "x.json") == 3


def test_exit_code_budget_exceeded(tmp_path):
    src = tmp_path / "big.json"
    write_distribution(DiscreteDistribution(
        np.random.default_rng(0).normal(size=(40, 1))), src)
    assert run("reduce", "--input", src, "--m", 10, "--algo", "exact-discrete",
               "--budget", 100, "--out", tmp_path / "x.json") == 4


def test_export_milp_cli(tmp_path):
    src = tmp_path / "two.json"
    write_distribution(DiscreteDistribution([[0.0], [3.0]]), src)
    out = tmp_path / "model.lp"
    assert run("export-milp", "--input", src, "--m", 1,
               "--formulation", "continuous", "--l", 1, "--norm", "1",
               "--out", out) == 0
    text = out.read_text()
    assert text.startswith("\\")
    assert text.endswith("End\n")
    # MISOCP cases are refused
    assert run("export-milp", "--input", src, "--m", 1,
               "--formulation", "continuous", "--l", 2, "--norm", "2",
               "--out", out) == 3


def test_quantize_cli(tmp_path):
    img_path = tmp_path / "in.ppm"
    write_ppm(bundled_image(), img_path)
    out = tmp_path / "out.ppm"
    report = tmp_path / "report.json"
    assert run("quantize", "--image", img_path, "--colors", 4, "--algo", "loc1",
               "--pre", 32, "--out", out, "--report", report) == 0
    doc = json.loads(report.read_text())
    assert doc["entries"][0]["algorithm"] == "loc1"
    quantized = out.read_bytes()
    assert quantized.startswith(b"P6\n64 64\n255\n")


def test_experiment_cli_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("experiment", "normal", "--n", 10, "--m", "3", "--d", "2,4",
                   "--trials", 2, "--seed", 7, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "d,m,mean_ratio,std_ratio,trials"
    assert len(lines) == 3
