"""Command-line front end.

Subcommands map one-to-one onto library operations: generate, analyze,
keygen, mark, identify, attack, dk2, fit, experiment.  Exit codes: 0 on
success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import adversary, metrics, models, separation, watermark
from ._kv import format_kv
from .errors import GraphMarkError
from .experiment import ExperimentConfig, run_experiment
from .graph import Graph, identity_distances, read_edge_list_path, write_edge_list_path
from .plotting import render_experiment_figure


def _model_params(args) -> models.ErdosRenyiParams | models.PowerLawParams:
    if args.model == "er":
        return models.ErdosRenyiParams(n=args.n, p=args.p)
    return models.derive_constants(n=args.n, m=args.m, w=args.w, gamma=args.gamma)


def _load_graph(path: str) -> Graph:
    return read_edge_list_path(path)


def _thresholds_for(args, n: int) -> separation.SeparationThresholds:
    if args.h is None or args.medium is None:
        raise GraphMarkError("pass --h and --medium (labeling class sizes)")
    return separation.SeparationThresholds(
        kind="custom", h=args.h, medium=args.medium, d=3.0,
        d_prime=1.0, analytic=False,
    )


def _cmd_generate(args) -> int:
    if args.params:
        params, seed = models.params_from_text(Path(args.params).read_text())
        seed = args.seed if args.seed is not None else (seed or 0)
    else:
        if args.model is None:
            raise GraphMarkError("pass --model or --params")
        params = _model_params(args)
        seed = args.seed if args.seed is not None else 0
    if isinstance(params, models.ErdosRenyiParams):
        g = models.sample_er(params, seed)
        kind = "er"
    else:
        g = models.sample_power_law(params, seed)
        kind = "plg"
    write_edge_list_path(g, args.output)
    print(f"model={kind} n={g.n} edges={g.num_edges} seed={seed} output={args.output}")
    return 0


def _cmd_analyze(args) -> int:
    g = _load_graph(args.input)
    if args.h is not None and args.medium is not None:
        thresholds = separation.SeparationThresholds(
            kind="custom", h=args.h, medium=args.medium,
            d=args.d, d_prime=args.d_prime, analytic=False,
        )
    elif args.model == "er":
        thresholds = separation.er_thresholds(g.n, args.p, d=args.d)
    elif args.model == "plg":
        params = models.derive_constants(n=g.n, m=args.m, w=args.w, gamma=args.gamma)
        thresholds = separation.plg_thresholds(params)
    else:
        raise GraphMarkError("pass --h/--medium overrides or --model with parameters")
    labels = separation.label(g, thresholds, mode=args.mode)
    report = separation.check_separation(
        g, thresholds, d=args.d, d_prime=args.d_prime, labels=labels
    )
    sys.stdout.write(format_kv({
        "n": g.n, "edges": g.num_edges, "h": thresholds.h,
        "medium": thresholds.medium, "mode": args.mode,
        "high_collisions": labels.high_collisions,
        "medium_collisions": labels.medium_collisions,
    }))
    sys.stdout.write(report.to_text())
    if args.tune_medium:
        tuned = separation.tune_medium_count(g, thresholds.h, mode=args.mode)
        print(f"max_collision_free_medium={tuned}")
    return 0


def _cmd_keygen(args) -> int:
    key = watermark.keygen(args.ell, args.n, args.x, args.t, args.seed)
    Path(args.output).write_text(key.to_text())
    print(f"ell={key.ell} n={key.n} t={key.t} output={args.output}")
    return 0


def _resample_source(args, n: int):
    if args.resample == "model":
        if args.model is None:
            raise GraphMarkError("model resampling needs --model and its parameters")
        args.n = n
        return watermark.ModelResample(_model_params(args))
    if args.resample.startswith("constant"):
        _, _, value = args.resample.partition(":")
        return watermark.ConstantResample(float(value) if value else 0.5)
    raise GraphMarkError(f"unknown resample source {args.resample!r}")


def _cmd_mark(args) -> int:
    g = _load_graph(args.graph)
    key = watermark.MarkKey.from_text(Path(args.key).read_text())
    thresholds = _thresholds_for(args, g.n)
    labels = separation.label(g, thresholds, mode=args.mode)
    copy = watermark.mark(key, g, labels, args.seed, resample=_resample_source(args, g.n))
    write_edge_list_path(copy.graph, args.output)
    with open(args.id_out, "w", encoding="utf-8", newline="\n") as fh:
        watermark.write_id(copy.id, fh)
    print(f"flips={copy.flips} id={copy.id.bits} output={args.output} id_output={args.id_out}")
    return 0


def _cmd_identify(args) -> int:
    g = _load_graph(args.original)
    suspect = _load_graph(args.suspect)
    key = watermark.MarkKey.from_text(Path(args.key).read_text())
    with open(args.ids, "r", encoding="utf-8") as fh:
        ids = watermark.read_ids(fh)
    thresholds = _thresholds_for(args, g.n)
    result = watermark.identify(
        key, g, ids, suspect, thresholds, mode=args.mode,
        max_distance=args.max_distance,
    )
    if result.bottom:
        print(f"result=bottom reason={result.failure}")
    else:
        print(
            f"result={result.matched_index} distance={result.distance} "
            f"id={result.matched_id.bits}"
        )
    return 0


def _cmd_attack(args) -> int:
    g = _load_graph(args.graph)
    if args.config:
        attacked = adversary.apply_attack_config(g, Path(args.config).read_text())
    elif args.attack == "random":
        attacked = adversary.random_flip_attack(g, args.prob, args.seed)
    elif args.attack == "uniform":
        num = args.pairs
        if num is None:
            if args.fraction is None:
                raise GraphMarkError("uniform attack needs --pairs or --fraction")
            num = int(round(args.fraction * adversary.pair_count(g.n)))
        attacked = adversary.uniform_pair_attack(g, num, args.seed)
    elif args.attack == "capped":
        total = args.total
        if total is None:
            if args.fraction is None:
                raise GraphMarkError("capped attack needs --total or --fraction")
            total = int(round(args.fraction * adversary.pair_count(g.n)))
        budget = adversary.AttackBudget(total, args.per_vertex)
        attacked = adversary.budget_capped_attack(g, budget, args.strategy, args.seed).graph
    else:
        raise GraphMarkError("pass --attack or --config")
    write_edge_list_path(attacked, args.output)
    edit, vertex = identity_distances(g, attacked)
    print(f"flips={edit} max_per_vertex={vertex} output={args.output}")
    return 0


def _cmd_dk2(args) -> int:
    g = _load_graph(args.graph)
    series = metrics.dk2_series(g)
    if args.other:
        other = metrics.dk2_series(_load_graph(args.other))
        print(f"deviation={metrics.dk2_deviation(series, other):.6g}")
        return 0
    text = metrics.dk2_to_text(series)
    if args.output:
        Path(args.output).write_text(text)
        print(f"tuples={len(series)} output={args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_fit(args) -> int:
    if args.samples:
        values = [float(line) for line in Path(args.samples).read_text().split()]
    else:
        g = _load_graph(args.graph)
        values = [float(d) for d in g.degrees]
    fit = metrics.fit_power_law(
        values, xmin=args.xmin, resamples=args.resamples,
        seed=args.seed, skip_pvalue=args.skip_pvalue,
    )
    sys.stdout.write(fit.to_text())
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_text(Path(args.config).read_text())
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    output = args.output or config.output
    if output is None:
        raise GraphMarkError("pass -o/--output or set output= in the config")
    result = run_experiment(config)
    Path(output).write_text(result.to_csv())
    printed = [f"output={output}"]
    if not args.no_plot:
        plot_path = args.plot or str(Path(output).with_suffix(".png"))
        render_experiment_figure(result, plot_path)
        printed.append(f"plot={plot_path}")
    if args.plot_data:
        dat_path = str(Path(output).with_suffix(".dat"))
        Path(dat_path).write_text(result.to_plot_data())
        printed.append(f"plot_data={dat_path}")
    for pt in result.points:
        print(
            f"attack_value={pt.attack_value:g} success_rate={pt.success_rate:.3f} "
            f"bottoms={pt.bottoms} wrongs={pt.wrongs} dk2={pt.mean_dk2_deviation:.4g}"
        )
    print(" ".join(printed))
    return 0


def _add_model_args(parser: argparse.ArgumentParser, require: bool = False) -> None:
    parser.add_argument("--model", choices=["er", "plg"], required=require)
    parser.add_argument("--n", type=int)
    parser.add_argument("--p", type=float, default=0.1)
    parser.add_argument("--m", type=float, default=1000.0)
    parser.add_argument("--w", type=float, default=20.0)
    parser.add_argument("--gamma", type=float, default=2.75)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphmark",
        description="Graph watermarking by keyed edge flips: models, marking, attacks, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a random graph to an edge-list file")
    _add_model_args(p)
    p.add_argument("--params", help="key=value params file instead of flags")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("analyze", help="degree-class labeling and separation report")
    p.add_argument("--input", required=True)
    p.add_argument("--h", type=int)
    p.add_argument("--medium", type=int)
    _add_model_args(p)
    p.add_argument("--mode", choices=["strict", "relaxed"], default="relaxed")
    p.add_argument("--d", type=float, default=3.0)
    p.add_argument("--d-prime", dest="d_prime", type=float, default=1.0)
    p.add_argument("--tune-medium", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("keygen", help="sample a mark key")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, required=True, help="number of rankable vertices")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("mark", help="embed a watermark into a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--medium", type=int, required=True)
    p.add_argument("--mode", choices=["strict", "relaxed"], default="relaxed")
    p.add_argument("--resample", default="constant:0.5")
    _add_model_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--id-out", dest="id_out", required=True)
    p.set_defaults(func=_cmd_mark)

    p = sub.add_parser("identify", help="identify a suspect graph among known ids")
    p.add_argument("--original", required=True)
    p.add_argument("--suspect", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--ids", required=True, help="file with one id per line")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--medium", type=int, required=True)
    p.add_argument("--mode", choices=["strict", "relaxed"], default="relaxed")
    p.add_argument("--max-distance", dest="max_distance", type=int, default=None)
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("attack", help="apply an edge-flipping adversary")
    p.add_argument("--graph", required=True)
    p.add_argument("--config", help="key=value attack config file")
    p.add_argument("--attack", choices=["random", "uniform", "capped"])
    p.add_argument("--prob", type=float, default=0.01)
    p.add_argument("--pairs", type=int)
    p.add_argument("--fraction", type=float)
    p.add_argument("--total", type=int)
    p.add_argument("--per-vertex", dest="per_vertex", type=int, default=1)
    p.add_argument("--strategy", default="random_pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("dk2", help="joint degree series of a graph, or deviation of two")
    p.add_argument("--graph", required=True)
    p.add_argument("--other")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_dk2)

    p = sub.add_parser("fit", help="power-law fit of a degree sequence")
    p.add_argument("--graph")
    p.add_argument("--samples", help="whitespace-separated numbers file")
    p.add_argument("--xmin", type=float, default=None)
    p.add_argument("--resamples", type=int, default=metrics.DEFAULT_BOOTSTRAP_RESAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-pvalue", action="store_true")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("experiment", help="run the watermarking security experiment sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("-o", "--output")
    p.add_argument("--plot", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--plot-data", action="store_true", help="also write gnuplot-ready columns")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "graph", None) is None and getattr(args, "samples", None) is None \
            and args.command == "fit":
        parser.error("fit needs --graph or --samples")
    try:
        return args.func(args)
    except GraphMarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
