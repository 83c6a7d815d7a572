"""Command-line interface tying the library together behind stable file
formats.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 enumeration
budget exceeded. All floating-point output is rendered with 17 significant
digits, so identical invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .core import (BudgetExceededError, DiscreteDistribution, Metric,
                   ValidationError, require_valid)
from .exact import (continuous_exact, discrete_exact, export_milp_continuous,
                    export_milp_discrete)
from .heuristics import dupacova_greedy, k_means_generalized, local_search
from .limits import (gen_adversarial, gen_kappa_tight, gen_worst_case,
                     limit_bounds, normal_experiment)
from .quantize import load_image, quantize_image, write_ppm
from .transport import wasserstein


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad}  {json.dumps(str(k))}: {_render_json(v, indent + 1)}'
                for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            return "[]"
        flat = all(isinstance(v, (int, float, np.integer, np.floating)) for v in items)
        if flat:
            return "[" + ", ".join(_render_json(v) for v in items) + "]"
        rows = [f"{pad}  {_render_json(v, indent + 1)}" for v in items]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise TypeError(f"cannot render {type(obj)!r}")


def dump_json(obj, path=None) -> str:
    text = _render_json(obj) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as handle:
            handle.write(text)
    return text


def read_distribution(path) -> DiscreteDistribution:
    """Load a distribution file (JSON or CSV; see the README grammar)."""
    name = str(path).lower()
    if name.endswith(".csv"):
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            raise ValidationError(f"{path}: empty CSV distribution file")
        header = [h.strip() for h in rows[0]]
        has_weight = header and header[-1] == "weight"
        dim = len(header) - (1 if has_weight else 0)
        if dim < 1 or not all(h == f"x{i + 1}" for i, h in enumerate(header[:dim])):
            raise ValidationError(
                f"{path}: CSV header must be x1..xd[,weight], got {header}")
        points, weights = [], []
        for row in rows[1:]:
            if not row:
                continue
            vals = [float(v) for v in row]
            points.append(vals[:dim])
            if has_weight:
                weights.append(vals[dim])
        dist = DiscreteDistribution(points, weights if has_weight else None)
    else:
        with open(path) as handle:
            doc = json.load(handle)
        if "points" not in doc:
            raise ValidationError(f"{path}: distribution JSON needs a 'points' key")
        dist = DiscreteDistribution(doc["points"], doc.get("weights"),
                                    dim=doc.get("dim"))
    require_valid(dist)
    return dist


def write_distribution(dist: DiscreteDistribution, path) -> None:
    name = str(path).lower()
    if name.endswith(".csv"):
        with open(path, "w", newline="\n") as handle:
            handle.write(",".join(f"x{i + 1}" for i in range(dist.dim)) + ",weight\n")
            for pt, w in zip(dist.points, dist.weights):
                handle.write(",".join(_fmt(v) for v in pt) + f",{_fmt(w)}\n")
        return
    dump_json({
        "dim": dist.dim,
        "points": [list(map(float, row)) for row in dist.points],
        "weights": [float(w) for w in dist.weights],
    }, path)


def _metric_from_args(args) -> Metric:
    return Metric(args.l, args.norm)


def _cmd_distance(args) -> int:
    p = read_distribution(args.p)
    q = read_distribution(args.q)
    value, plan = wasserstein(p, q, _metric_from_args(args))
    print(_fmt(value))
    if args.plan:
        with open(args.plan, "w", newline="\n") as handle:
            handle.write("i,j,mass\n")
            rows, cols = np.nonzero(plan.matrix > 0)
            for i, j in zip(rows, cols):
                handle.write(f"{i + 1},{j + 1},{_fmt(plan.matrix[i, j])}\n")
    return 0


_REDUCERS = ("dupacova", "kmeans", "local", "local-warm",
             "exact-discrete", "exact-continuous")


def _cmd_reduce(args) -> int:
    dist = read_distribution(args.input)
    metric = _metric_from_args(args)
    if args.algo == "dupacova":
        result = dupacova_greedy(dist, args.m, metric)
    elif args.algo == "kmeans":
        result = k_means_generalized(dist, args.m, metric, init=args.seed)
    elif args.algo == "local":
        result = local_search(dist, args.m, metric, epsilon=args.epsilon)
    elif args.algo == "local-warm":
        warm = dupacova_greedy(dist, args.m, metric)
        result = local_search(dist, args.m, metric, init=warm,
                              epsilon=args.epsilon)
    elif args.algo == "exact-discrete":
        result = discrete_exact(dist, args.m, metric, budget=args.budget)
    else:
        result = continuous_exact(dist, args.m, metric, budget=args.budget)
    payload = {
        "algorithm": result.algorithm,
        "m": args.m,
        "l": metric.l,
        "norm": metric.norm_name,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "value": result.value,
        "support": [list(map(float, row)) for row in result.support],
        "weights": [float(w) for w in result.weights],
        "partition": [list(cell) for cell in result.partition.cells],
        "iterations": result.iterations,
        "evaluations": result.evaluations,
    }
    text = dump_json(payload, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _cmd_bounds(args) -> int:
    report = limit_bounds(args.n, args.m, args.l)
    sys.stdout.write(dump_json(report.to_dict()))
    return 0


def _require_args(args, names) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise _UsageError(f"family {args.family!r} needs {', '.join(missing)}")


class _UsageError(ValueError):
    pass


def _cmd_gen(args) -> int:
    fam = args.family
    if fam == "worst-case":
        _require_args(args, ["n"])
        d = args.d if args.d is not None else args.n
        dist = gen_worst_case(args.n, d)
    elif fam in ("kappa2", "kappa1"):
        _require_args(args, ["n", "m"])
        l = 2 if fam == "kappa2" else 1
        dist = gen_kappa_tight(l, args.n, args.m, d=args.d, M=args.M)
    elif fam == "dupacova-adv":
        _require_args(args, ["z", "eps"])
        dist = gen_adversarial("dupacova", args.z, args.eps,
                               args.d if args.d is not None else 2)
    else:
        _require_args(args, ["z", "eps"])
        dist = gen_adversarial("kmeans", args.z, args.eps,
                               args.d if args.d is not None else 1)
    write_distribution(dist, args.out)
    return 0


def _cmd_export_milp(args) -> int:
    dist = read_distribution(args.input)
    metric = _metric_from_args(args)
    if args.formulation == "discrete":
        export = export_milp_discrete(dist, args.m, metric)
    else:
        export = export_milp_continuous(dist, args.m, metric)
    with open(args.out, "w", newline="\n") as handle:
        handle.write(export.text)
    return 0


def _cmd_quantize(args) -> int:
    image = load_image(args.image)
    _, remapped, report = quantize_image(image, args.colors, args.algo,
                                         n_pre=args.pre)
    write_ppm(remapped, args.out)
    if args.report:
        with open(args.report, "w", newline="\n") as handle:
            handle.write(report.to_json())
    return 0


def _cmd_experiment_normal(args) -> int:
    m_list = [int(v) for v in args.m.split(",") if v]
    d_list = [int(v) for v in args.d.split(",") if v]
    table = normal_experiment(args.n, m_list, d_list, c=args.c,
                              trials=args.trials, seed=args.seed)
    with open(args.out, "w", newline="\n") as handle:
        handle.write(table.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenred",
        description="Wasserstein-distance scenario reduction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_metric(p):
        p.add_argument("--l", type=float, default=2, choices=[1.0, 2.0],
                       help="Wasserstein order")
        p.add_argument("--norm", default="2", choices=["1", "2", "inf"],
                       help="ground norm")

    p = sub.add_parser("distance", help="Wasserstein distance between two files")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    add_metric(p)
    p.add_argument("--plan", default=None, help="write the transport plan CSV here")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("reduce", help="reduce a distribution to m atoms")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--algo", required=True, choices=_REDUCERS)
    add_metric(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("bounds", help="closed-form worst-case and ratio bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--l", type=float, default=2, choices=[1.0, 2.0])
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("gen", help="generate a named instance family")
    p.add_argument("--family", required=True,
                   choices=["worst-case", "kappa2", "kappa1",
                            "dupacova-adv", "kmeans-adv"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--z", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("export-milp", help="write a mixed-integer model file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--formulation", required=True,
                   choices=["discrete", "continuous"])
    add_metric(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_milp)

    p = sub.add_parser("quantize", help="color-quantize a PPM image")
    p.add_argument("--image", required=True)
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--algo", default="loc1",
                   choices=["dpcv", "loc1", "loc2", "exact"])
    p.add_argument("--pre", type=int, default=1024)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_quantize)

    p = sub.add_parser("experiment", help="numerical experiments")
    exp_sub = p.add_subparsers(dest="experiment", required=True)
    pn = exp_sub.add_parser("normal", help="normal-sampling worst-case ratio table")
    pn.add_argument("--n", type=int, required=True)
    pn.add_argument("--m", required=True, help="comma-separated m values")
    pn.add_argument("--d", required=True, help="comma-separated dimensions")
    pn.add_argument("--c", type=float, default=2.97)
    pn.add_argument("--trials", type=int, default=100)
    pn.add_argument("--seed", type=int, default=0)
    pn.add_argument("--out", required=True)
    pn.set_defaults(func=_cmd_experiment_normal)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError, csv.Error, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
