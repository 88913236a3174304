"""Command-line entry point: ``qencbench <subcommand> ...``."""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import BACKEND, __version__, featsel, plots, runner, stats
from .encoders import MAP_KINDS, SCALINGS, EncodingSpec
from .errors import QencError
from .expressibility import (DEFAULT_SHOTS, dataset_expressibility, read_report_csv,
                             uniform_expressibility, write_report_csv)
from .qkernel import MODES, KernelConfig

log = logging.getLogger("qencbench")


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_run_flags(p):
    for f in dataclasses.fields(runner.RunConfig):
        parse = runner.FIELD_PARSERS[f.name]
        default = f.default
        if isinstance(default, tuple):
            default = ",".join(map(str, default))
        p.add_argument(_flag(f.name), dest=f.name, type=parse, default=None,
                       help=f"(default: {default})")


def _cmd_benchmark(args):
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(runner.RunConfig)}
    if args.config:
        cfg = runner.parse_config(args.config, **overrides)
    else:
        cfg = runner.RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    if not cfg.dataset:
        raise QencError("no dataset given (use --dataset or a config file)")
    report = runner.run_benchmark(cfg)
    if not args.no_plots:
        plots.emit_plots(report)
    for m in stats.METRICS:
        e = report.stats[m]
        means = " ".join(f"{k}={v:.4f}" for k, v in e["means"].items())
        tail = f"ANOVA p={e['anova']['p_value']}" if not e["skipped"] else f"skipped: {e['skipped']}"
        print(f"{m}: {means} | {tail}")
    print(f"wrote {len(report.records)} records to {report.files['results']}")
    return 0


def _cmd_select(args):
    data = runner.load_dataset(args.data, args.label_column, None, args.positive_class)
    target = (data.labels > 0).astype(np.float64)
    if args.alpha is not None:
        q = featsel.build_qubo(data.features, target, args.alpha)
        if args.solver == "exhaustive":
            res = featsel.solve_exhaustive(q)
        else:
            res = featsel.solve_annealing(q, args.sweeps, args.restarts, args.seed)
    else:
        if args.k is None:
            raise QencError("give --k or --alpha")
        res = featsel.select_k_features(data.features, target, args.k, solver=args.solver,
                                        sweeps=args.sweeps, restarts=args.restarts,
                                        seed=args.seed)
    featsel.write_selection(res, args.out)
    names = [data.feature_names[i] for i in res.chosen]
    flag = " (adjusted)" if res.adjusted else ""
    print(f"selected {len(res.chosen)} features{flag}: {','.join(map(str, res.chosen))} "
          f"[{', '.join(names)}] alpha={res.alpha:.6g} energy={res.energy:.6g}")
    return 0


def _cmd_expressibility(args):
    maps = runner.parse_str_list(args.map)
    kcfg = KernelConfig(args.mode, args.shots, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if (args.uniform is None) == (args.data is None):
        raise QencError("give exactly one of --uniform N_FEATURES or --data PATH")
    if args.data is not None:
        data = runner.load_dataset(args.data, args.label_column,
                                   runner.parse_int_list(args.features), None)
        rows, n_feat = data.features, data.features.shape[1]
        name = args.dataset_name or Path(args.data).stem
    else:
        rows, n_feat, name = None, args.uniform, f"uniform{args.uniform}"
    for m in maps:
        spec = EncodingSpec(m, n_feat, scaling=args.scaling)
        if rows is None:
            rep = uniform_expressibility(spec, args.samples, args.seed, kcfg)
        else:
            rep = dataset_expressibility(rows, spec, None, kcfg, dataset=name)
        path = out / f"expressibility_{name}_{m}.csv"
        write_report_csv(rep, path)
        if args.plot:
            plots.emit_expressibility_plot(rep, path.with_suffix(".svg"))
        print(f"{name} {m}: {rep.score}")
    return 0


def _cmd_stats(args):
    records = runner.read_results_csv(args.results)
    baseline = None
    if args.baseline:
        n = len({r.split for r in records})
        baseline = runner.import_baseline(args.baseline, n)
    st = runner.compute_stats(records, baseline, args.baseline_name)
    out = Path(args.out)
    runner.atomic_write(out, stats.dumps(st) + "\n")
    runner.atomic_write(out.with_name(out.stem + "_summary.csv"), runner.stats_summary_csv(st))
    for m in stats.METRICS:
        e = st[m]
        print(f"{m}: " + (f"F={e['anova']['f_stat']} p={e['anova']['p_value']}"
                          if not e["skipped"] else f"skipped: {e['skipped']}"))
    return 0


def _cmd_plot(args):
    paths = []
    if args.results:
        records = runner.read_results_csv(args.results)
        baseline = None
        if args.baseline:
            baseline = runner.import_baseline(args.baseline, len({r.split for r in records}))
        paths += plots.emit_box_plots(records, args.out_dir, baseline=baseline,
                                      baseline_name=args.baseline_name)
    for csv_path in args.expressibility or ():
        rep = read_report_csv(csv_path)
        paths.append(plots.emit_expressibility_plot(
            rep, Path(args.out_dir) / (Path(csv_path).stem + ".svg")))
    if not paths:
        raise QencError("nothing to plot (give --results and/or --expressibility)")
    for p in paths:
        print(p)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="qencbench", description="Quantum data-encoding benchmark.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="run the split/encoding/SVC protocol")
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--no-plots", action="store_true")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("select-features", help="QUBO feature selection")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="-1")
    p.add_argument("--positive-class")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, help="solve at a fixed alpha instead of searching for k")
    p.add_argument("--solver", choices=("annealing", "exhaustive"), default="annealing")
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="selection.json", help=".json or .csv")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("expressibility", help="KL divergence against the Haar reference")
    p.add_argument("--map", default=",".join(MAP_KINDS), help="comma-separated map kinds")
    p.add_argument("--uniform", type=int, metavar="N_FEATURES",
                   help="sample rows uniformly from [0, 2pi]^N_FEATURES")
    p.add_argument("--data")
    p.add_argument("--dataset-name")
    p.add_argument("--label-column", default="-1")
    p.add_argument("--features", help="comma-separated feature column positions")
    p.add_argument("--scaling", choices=SCALINGS)
    p.add_argument("--samples", type=int, default=150)
    p.add_argument("--mode", choices=MODES, default="Exact")
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="expressibility")
    p.add_argument("--plot", action="store_true", help="also write an SVG overlay per map")
    p.set_defaults(func=_cmd_expressibility)

    p = sub.add_parser("stats", help="ANOVA + Tukey HSD from a results.csv")
    p.add_argument("--results", required=True)
    p.add_argument("--baseline")
    p.add_argument("--baseline-name", default="Baseline")
    p.add_argument("--out", default="stats.json")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("plot", help="SVG box plots and expressibility overlays")
    p.add_argument("--results")
    p.add_argument("--baseline")
    p.add_argument("--baseline-name", default="Baseline")
    p.add_argument("--expressibility", nargs="*", help="expressibility CSV files")
    p.add_argument("--out-dir", default="plots")
    p.set_defaults(func=_cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (QencError, OSError) as exc:
        print(f"qencbench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
