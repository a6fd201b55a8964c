"""Benchmark harness: cross-validated runs, aggregation and method comparison.

Every random choice in a run is derived from the master seed and the run's
``(dataset, trial, fold)`` coordinates, never from execution order, so the
metrics are identical for any number of worker processes. Both methods of a
run share the same trained network; ``ecs-dbn`` only adds the cost search.
"""

from __future__ import annotations

import csv
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dbn as dbn_mod
from . import ecs
from .cost import cost_scaled_proba
from .de import DeParams
from .exceptions import DegenerateInputError, ParameterError
from .keel import apply_minmax, load_dataset, minmax_normalize, stratified_kfold
from .metrics import evaluate
from .numerics import RngStream, derive_seed
from .rbm import CdConfig
from .stats import average_rank, holm_posthoc, wilcoxon_signed_rank

log = logging.getLogger(__name__)

METHODS = ("ecs-dbn", "dbn")
METRICS = ("accuracy", "gmean", "precision", "recall", "f1", "auc")
RUN_COLUMNS = ("dataset", "method", "trial", "fold", "seed", *METRICS, "best_costs", "wall_time_s")

_HIDDEN_STREAM = 1


@dataclass
class BenchSettings:
    hidden: str = "fixed"  # "fixed" or "random"
    hidden_sizes: tuple = (25, 25)
    hidden_range: tuple = (5, 50)
    learning_rate: float = 0.01
    pretrain_epochs: int = 100
    finetune_lr: float = 0.01
    finetune_epochs: int = 300
    batch_size: int = 10
    population_size: int = 30
    generations: int = 100
    stagnation_window: int = 30

    def layer_sizes(self, seed):
        if self.hidden == "fixed":
            return tuple(self.hidden_sizes)
        if self.hidden != "random":
            raise ParameterError(f"unknown hidden mode {self.hidden!r}")
        lo, hi = self.hidden_range
        rng = RngStream(seed, _HIDDEN_STREAM)
        return tuple(int(w) for w in rng.integers(lo, hi + 1, size=len(self.hidden_sizes)))

    def dbn_config(self, n_classes, seed):
        return dbn_mod.DbnConfig(
            layer_sizes=self.layer_sizes(seed), n_classes=n_classes,
            pretrain=CdConfig(self.learning_rate, self.pretrain_epochs, self.batch_size),
            finetune_lr=self.finetune_lr, finetune_epochs=self.finetune_epochs,
            finetune_batch_size=self.batch_size, seed=seed)

    def de_params(self):
        return DeParams(self.population_size, self.generations,
                        stagnation_window=self.stagnation_window)


@dataclass
class RunRecord:
    dataset: str
    method: str
    trial: int
    fold: int
    seed: int
    metrics: dict
    wall_time_s: float = 0.0
    best_costs: np.ndarray | None = None

    def key(self):
        return (self.dataset, self.method, self.trial, self.fold)

    def same_result(self, other):
        """Equality ignoring wall time."""
        return (self.key() == other.key() and self.seed == other.seed
                and self.metrics == other.metrics
                and _costs_equal(self.best_costs, other.best_costs))

    def __eq__(self, other):
        if not isinstance(other, RunRecord):
            return NotImplemented
        return self.same_result(other) and self.wall_time_s == other.wall_time_s


def _costs_equal(a, b):
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


def dataset_key(name):
    return zlib.crc32(name.encode("utf-8"))


@dataclass
class _Unit:
    name: str
    train: object
    test: object
    trial: int
    fold: int
    seed: int
    methods: tuple
    settings: BenchSettings = field(default_factory=BenchSettings)


def _run_unit(unit):
    train, test = unit.train, unit.test
    x_train, mins, maxs = minmax_normalize(train.raw_features)
    x_test = apply_minmax(test.raw_features, mins, maxs)
    k, positive = train.n_classes, train.minority_class
    cfg = unit.settings.dbn_config(k, unit.seed)

    t0 = time.perf_counter()
    net = dbn_mod.finetune(dbn_mod.pretrain(cfg, x_train), x_train, train.labels, cfg)
    dbn_time = time.perf_counter() - t0
    probs = dbn_mod.predict_proba(net, x_test)

    out = []
    for method in unit.methods:
        if method == "dbn":
            pred = np.argmax(probs, axis=1)
            m = evaluate(test.labels, pred, probs[:, positive], k, positive)
            out.append(RunRecord(unit.name, method, unit.trial, unit.fold, unit.seed, m, dbn_time))
        else:
            t1 = time.perf_counter()
            model = ecs.fit_costs(net, x_train, train.labels, unit.settings.de_params(),
                                  RngStream(unit.seed, ecs.DE_STREAM))
            elapsed = dbn_time + time.perf_counter() - t1
            scores = cost_scaled_proba(probs, model.best_costs)
            pred = np.argmax(scores, axis=1)
            m = evaluate(test.labels, pred, scores[:, positive], k, positive)
            out.append(RunRecord(unit.name, method, unit.trial, unit.fold, unit.seed, m,
                                 elapsed, model.best_costs))
    return out


def _plan_units(entry, data, methods, trials, folds, seed, split, settings):
    train_all, test_all = data
    key = dataset_key(entry.name)
    for trial in range(trials):
        if split == "keel":
            yield _Unit(entry.name, train_all, test_all, trial, 0,
                        derive_seed(seed, key, trial, 0), methods, settings)
            continue
        plan = stratified_kfold(train_all.labels, folds, derive_seed(seed, key, trial))
        for fold, (tr, te) in enumerate(plan):
            yield _Unit(entry.name, train_all.subset(tr), train_all.subset(te), trial, fold,
                        derive_seed(seed, key, trial, fold), methods, settings)


def _load(entry, split):
    train = load_dataset(entry.train_path)
    if split == "keel":
        if not entry.test_path:
            raise ParameterError(f"{entry.name}: catalog has no test partition for --split keel")
        test = load_dataset(entry.test_path, require_all_classes=False)
        if test.class_names != train.class_names or test.feature_names != train.feature_names:
            raise ParameterError(f"{entry.name}: train and test headers differ")
        return train, test
    return train, None


def run_benchmark(catalog, methods=METHODS, trials=10, folds=5, seed=0, split="cv",
                  settings=None, jobs=1, out_path=None):
    """Run every ``dataset x trial x fold`` for the given methods.

    Returns
    -------
    records : list of RunRecord
        In catalog order, then trial, fold and method order.
    failed : list of str
        Names of datasets that could not be loaded.
    """
    settings = settings or BenchSettings()
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}; choose from {METHODS}")
    if split not in ("cv", "keel"):
        raise ParameterError("split must be 'cv' or 'keel'")
    units, failed = [], []
    for entry in catalog:
        try:
            data = _load(entry, split)
        except (OSError, ValueError) as exc:
            log.error("skipping %s: %s", entry.name, exc)
            failed.append(entry.name)
            continue
        units.extend(_plan_units(entry, data, tuple(methods), trials, folds, seed, split, settings))
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_unit, units))
    else:
        results = [_run_unit(u) for u in units]
    records = [r for batch in results for r in batch]
    if out_path is not None:
        write_runs(records, out_path)
    return records, failed


def _fmt(v):
    return repr(float(v))


def write_runs(records, path, include_wall_time=True):
    columns = RUN_COLUMNS if include_wall_time else RUN_COLUMNS[:-1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in records:
            costs = "" if r.best_costs is None else ",".join(_fmt(c) for c in r.best_costs)
            row = [r.dataset, r.method, r.trial, r.fold, r.seed,
                   *(_fmt(r.metrics[m]) for m in METRICS), costs]
            if include_wall_time:
                row.append(_fmt(r.wall_time_s))
            w.writerow(row)


def read_runs(path):
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            costs = row.get("best_costs") or ""
            records.append(RunRecord(
                row["dataset"], row["method"], int(row["trial"]), int(row["fold"]), int(row["seed"]),
                {m: float(row[m]) for m in METRICS if m in row},
                float(row.get("wall_time_s") or 0.0),
                np.array([float(c) for c in costs.split(",")]) if costs else None))
    return records


def _cells(records):
    cells = {}
    for r in records:
        cells.setdefault((r.dataset, r.method), []).append(r)
    return cells


def aggregate(records, metrics=METRICS):
    """Sample mean and standard deviation (n - 1) per ``(dataset, method)``.

    Returns a dict mapping ``(dataset, method)`` to ``{metric: (mean, std)}``.
    """
    if not records:
        raise ParameterError("nothing to aggregate")
    out = {}
    for key, rs in _cells(records).items():
        stats = {}
        for m in metrics:
            # sort so float summation does not depend on record order
            v = np.sort([r.metrics[m] for r in rs])
            stats[m] = (float(np.mean(v)), float(np.std(v, ddof=1)) if v.size > 1 else 0.0)
        out[key] = stats
    return out


def write_aggregate(agg, path, metrics=METRICS):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "method", *(f"{m}_{s}" for m in metrics for s in ("mean", "std"))])
        for (ds, method), stats in sorted(agg.items()):
            w.writerow([ds, method, *(_fmt(x) for m in metrics for x in stats[m])])


@dataclass
class RivalComparison:
    method: str
    wins: int
    losses: int
    draws: int
    p_value: float
    holm_significant: bool


@dataclass
class DatasetComparison:
    dataset: str
    method: str
    control_mean: float
    rival_mean: float
    p_value: float
    significant: bool


@dataclass
class MetricComparison:
    metric: str
    datasets: list
    rivals: list
    per_dataset: list
    average_ranks: dict


def _safe_wilcoxon(a, b, alpha):
    try:
        res = wilcoxon_signed_rank(a, b, alpha)
        return res.p_value, res.significant
    except DegenerateInputError:
        return 1.0, False


def compare(records, control, metrics=METRICS, alpha=0.05):
    """Compare every method against ``control`` on each metric.

    Per rival: win/loss/draw counts of per-dataset mean scores, a Wilcoxon test
    across datasets and its Holm-adjusted significance. Per dataset: a
    Wilcoxon test over the runs paired by ``(trial, fold)``. Average ranks
    include every method.
    """
    cells = _cells(records)
    methods = sorted({r.method for r in records}, key=lambda m: (m != control, m))
    if control not in methods or len(methods) < 2:
        raise ParameterError("need the control method and at least one rival")
    per_method = {m: {d for d, mm in cells if mm == m} for m in methods}
    datasets = sorted(set.intersection(*per_method.values()))
    dropped = set.union(*per_method.values()) - set(datasets)
    if dropped:
        log.warning("restricting comparison to shared datasets; dropped %s", sorted(dropped))
    report = []
    for metric in metrics:
        means = {m: [float(np.mean(np.sort([r.metrics[metric] for r in cells[d, m]])))
                     for d in datasets] for m in methods}
        rivals, per_dataset = [], []
        for m in methods[1:]:
            c, r = np.array(means[control]), np.array(means[m])
            p, _ = _safe_wilcoxon(c, r, alpha)
            rivals.append(RivalComparison(m, int(np.sum(c > r)), int(np.sum(c < r)),
                                          int(np.sum(c == r)), p, False))
            for i, d in enumerate(datasets):
                ctl = {(x.trial, x.fold): x.metrics[metric] for x in cells[d, control]}
                riv = {(x.trial, x.fold): x.metrics[metric] for x in cells[d, m]}
                shared = sorted(set(ctl) & set(riv))
                pd, sig = _safe_wilcoxon([ctl[k] for k in shared], [riv[k] for k in shared], alpha)
                per_dataset.append(DatasetComparison(d, m, c[i], r[i], pd, sig))
        for rc, rej in zip(rivals, holm_posthoc([rc.p_value for rc in rivals], alpha)):
            rc.holm_significant = rej
        ranks = average_rank(np.array([means[m] for m in methods]))
        report.append(MetricComparison(metric, datasets, rivals, per_dataset,
                                       dict(zip(methods, map(float, ranks)))))
    return report


def write_comparison(report, summary_path, datasets_path):
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "method", "average_rank", "wins", "losses", "draws",
                    "p_value", "holm_significant"])
        for mc in report:
            by_method = {rc.method: rc for rc in mc.rivals}
            for method, rank in mc.average_ranks.items():
                rc = by_method.get(method)
                if rc is None:
                    w.writerow([mc.metric, method, _fmt(rank), "", "", "", "", ""])
                else:
                    w.writerow([mc.metric, method, _fmt(rank), rc.wins, rc.losses, rc.draws,
                                _fmt(rc.p_value), int(rc.holm_significant)])
    with open(datasets_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "dataset", "method", "control_mean", "rival_mean",
                    "p_value", "significant"])
        for mc in report:
            for dc in mc.per_dataset:
                w.writerow([mc.metric, dc.dataset, dc.method, _fmt(dc.control_mean),
                            _fmt(dc.rival_mean), _fmt(dc.p_value), int(dc.significant)])


def format_comparison(report, control):
    lines = []
    for mc in report:
        lines.append(f"== {mc.metric} (control: {control}, {len(mc.datasets)} datasets)")
        lines.append("  average rank: " + ", ".join(
            f"{m}={r:.3f}" for m, r in sorted(mc.average_ranks.items(), key=lambda kv: kv[1])))
        for rc in mc.rivals:
            lines.append(f"  vs {rc.method}: win/lose/draw {rc.wins}/{rc.losses}/{rc.draws}, "
                         f"p={rc.p_value:.4g}, holm {'significant' if rc.holm_significant else 'n.s.'}")
        for dc in mc.per_dataset:
            lines.append(f"    {dc.dataset:<16} {dc.control_mean:.4f} vs {dc.rival_mean:.4f} "
                         f"({dc.method})  p={dc.p_value:.4g}{' *' if dc.significant else ''}")
    return "\n".join(lines) + "\n"
