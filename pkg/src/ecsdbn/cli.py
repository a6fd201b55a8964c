"""Command-line entry point: ``ecsdbn run|aggregate|compare|inspect-dataset|train|predict``.

Exit codes: 0 success, 1 partial failure, 2 configuration error.
Options resolve as command-line flag, then ``--config`` file (``key=value``
lines, ``#`` comments), then built-in default.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import bench, ecs, keel
from . import dbn as dbn_mod
from .exceptions import FormatError, ParameterError
from .numerics import RngStream

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("ecsdbn")


class ConfigError(Exception):
    pass


def _csv_list(s):
    return tuple(p.strip() for p in str(s).split(",") if p.strip())


def _int_pair(s):
    vals = tuple(int(p) for p in _csv_list(s))
    if len(vals) < 1:
        raise ValueError("empty list")
    return vals


# option name -> (type, default)
RUN_OPTIONS = {
    "catalog": (str, "builtin"),
    "methods": (_csv_list, bench.METHODS),
    "trials": (int, 10),
    "folds": (int, 5),
    "seed": (int, 0),
    "split": (str, "cv"),
    "hidden": (str, "fixed"),
    "hidden_sizes": (_int_pair, (25, 25)),
    "out": (str, "results"),
    "jobs": (int, 1),
    "learning_rate": (float, 0.01),
    "pretrain_epochs": (int, 100),
    "finetune_lr": (float, 0.01),
    "finetune_epochs": (int, 300),
    "batch_size": (int, 10),
    "population": (int, 30),
    "generations": (int, 100),
    "stagnation_window": (int, 30),
}


def read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in RUN_OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_options(args, options=RUN_OPTIONS):
    """Merge parsed flags over the config file over defaults."""
    from_file = read_config(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for key, (conv, default) in options.items():
        flag = getattr(args, key, None)
        try:
            if flag is not None:
                resolved[key] = conv(flag)
            elif key in from_file:
                resolved[key] = conv(from_file[key])
            else:
                resolved[key] = default
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return resolved


def _catalog(source):
    if source == "builtin":
        return keel.builtin_catalog()
    try:
        return keel.load_catalog(source)
    except OSError as exc:
        raise ConfigError(f"cannot read catalog {source}: {exc}") from None
    except FormatError as exc:
        raise ConfigError(f"bad catalog {source}: {exc}") from None


def _settings(opts):
    return bench.BenchSettings(
        hidden=opts["hidden"], hidden_sizes=opts["hidden_sizes"],
        learning_rate=opts["learning_rate"], pretrain_epochs=opts["pretrain_epochs"],
        finetune_lr=opts["finetune_lr"], finetune_epochs=opts["finetune_epochs"],
        batch_size=opts["batch_size"], population_size=opts["population"],
        generations=opts["generations"], stagnation_window=opts["stagnation_window"])


def cmd_run(args):
    opts = resolve_options(args)
    if opts["split"] not in ("cv", "keel") or opts["hidden"] not in ("fixed", "random"):
        raise ConfigError("--split must be cv|keel and --hidden fixed|random")
    catalog = _catalog(opts["catalog"])
    os.makedirs(opts["out"], exist_ok=True)
    runs_path = os.path.join(opts["out"], "runs.csv")
    try:
        records, failed = bench.run_benchmark(
            catalog, opts["methods"], opts["trials"], opts["folds"], opts["seed"],
            opts["split"], _settings(opts), opts["jobs"], runs_path)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    print(f"wrote {len(records)} records to {runs_path}")
    if records:
        agg_path = os.path.join(opts["out"], "aggregate.csv")
        bench.write_aggregate(bench.aggregate(records), agg_path)
        print(f"wrote {agg_path}")
    if failed:
        print(f"failed datasets: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_aggregate(args):
    records = _read_runs(args.runs)
    agg = bench.aggregate(records)
    bench.write_aggregate(agg, args.out)
    for (ds, method), stats in sorted(agg.items()):
        cells = "  ".join(f"{m} {mean:.4f}±{std:.4f}" for m, (mean, std) in stats.items())
        print(f"{ds:<16} {method:<8} {cells}")
    return EXIT_OK


def cmd_compare(args):
    records = _read_runs(args.runs)
    try:
        report = bench.compare(records, args.control, alpha=args.alpha)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    os.makedirs(args.out, exist_ok=True)
    bench.write_comparison(report, os.path.join(args.out, "compare.csv"),
                           os.path.join(args.out, "compare_datasets.csv"))
    text = bench.format_comparison(report, args.control)
    with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def _read_runs(path):
    try:
        return bench.read_runs(path)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read runs file {path}: {exc}") from None


def _load_any(source):
    path = keel.builtin_path(source) if source in keel.BUILTIN_DATASETS else source
    try:
        return keel.load_dataset(path)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {source}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad dataset {source}: {exc}") from None


def cmd_inspect(args):
    ds = _load_any(args.dataset)
    counts = ds.class_counts
    print(f"name:          {ds.name}")
    print(f"samples:       {ds.n_samples}")
    print(f"attributes:    {ds.n_attributes} ({len(ds.feature_names)} encoded features)")
    print(f"classes:       " + ", ".join(f"{c}={n}" for c, n in zip(ds.class_names, counts)))
    print(f"minority:      {ds.class_names[ds.minority_class]}")
    print(f"imbalance:     {counts.max() / counts.min():.2f}")
    return EXIT_OK


def cmd_train(args):
    opts = resolve_options(args)
    ds = _load_any(args.dataset)
    x, mins, maxs = keel.minmax_normalize(ds.raw_features)
    settings = _settings(opts)
    cfg = settings.dbn_config(ds.n_classes, opts["seed"])
    net = dbn_mod.finetune(dbn_mod.pretrain(cfg, x), x, ds.labels, cfg)
    if args.method == "dbn":
        zeros = np.zeros(ds.n_classes)
        model = ecs.EcsDbnModel(net, zeros, ecs.GmeanFitness(dbn_mod.predict_proba(net, x), ds.labels)(zeros))
    else:
        model = ecs.fit_costs(net, x, ds.labels, settings.de_params(),
                              RngStream(opts["seed"], ecs.DE_STREAM))
    model.input_min, model.input_max = mins, maxs
    ecs.save_model(model, args.model)
    print(f"training G-mean {model.training_fitness:.4f}; costs "
          + ",".join(f"{c:.4f}" for c in model.best_costs) + f"; saved {args.model}")
    return EXIT_OK


def cmd_predict(args):
    try:
        model = ecs.load_model(args.model)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load model {args.model}: {exc}") from None
    ds = _load_any(args.dataset)
    x = ds.raw_features
    if model.input_min is not None:
        x = keel.apply_minmax(x, model.input_min, model.input_max)
    pred = ecs.predict(model, x)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "predicted", "actual"])
        for i, (p, a) in enumerate(zip(pred, ds.labels)):
            w.writerow([i, ds.class_names[p], ds.class_names[a]])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _add_run_flags(p):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--catalog", help="catalog file, or 'builtin' for the bundled datasets")
    p.add_argument("--methods", help="comma-separated subset of " + ",".join(bench.METHODS))
    p.add_argument("--trials", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--split", choices=("keel", "cv"))
    p.add_argument("--hidden", choices=("fixed", "random"))
    p.add_argument("--hidden-sizes", dest="hidden_sizes")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--pretrain-epochs", dest="pretrain_epochs", type=int)
    p.add_argument("--finetune-lr", dest="finetune_lr", type=float)
    p.add_argument("--finetune-epochs", dest="finetune_epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--stagnation-window", dest="stagnation_window", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="ecsdbn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the cross-validated benchmark")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("aggregate", help="mean and std per dataset and method")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("compare", help="Wilcoxon/Holm/rank comparison against a control")
    p.add_argument("--runs", required=True)
    p.add_argument("--control", default="ecs-dbn")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("inspect-dataset", help="summarize a KEEL file or bundled dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("train", help="train on a whole dataset and save the model")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=bench.METHODS, default="ecs-dbn")
    _add_run_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict a KEEL file with a saved model")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
