"""Experiment grid runner and command-line interface.

Reads a JSON config, generates or loads best-known reference tables, executes
the method x function x experiment x tau x seed grid with a worker pool, and
persists traces plus metric summaries as CSV. Subcommands:

* ``run``        execute the configured suite
* ``best-known`` generate reference tables only
* ``metrics``    recompute metric rows from stored traces
* ``rank``       mean-rank tables from a metrics CSV

Every run seed is derived deterministically from the master seed and the
cell coordinates, so a rerun with the same config reproduces every CSV byte
for byte (virtual clock mode).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import struct
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    DEFAULT_COST_EVAL,
    DEFAULT_COST_NN_PREDICT,
    DEFAULT_COST_NN_TRAIN,
    DEParams,
    Diversity,
    DiversityKind,
    Reaction,
    RunConfig,
    run_dynamic,
)
from .core import STREAM_ENV, make_rng
from .metrics import MetricReport, RunTrace, compute_report, mean_ranks
from .predictor import PredictorConfig
from .problems import (
    BestKnownTable,
    Experiment,
    ExperimentSpec,
    Landscape,
    build_trajectory,
    generate_best_known,
)

METHOD_NAMES = [
    "noNN_No", "NN_No",
    "noNN_CwN", "NN_CwN",
    "noNN_RI", "NN_RI",
    "noNN_Rst", "NN_Rst",
    "noNN_HMu", "NN_HMu",
]

METRICS_HEADER = ["method", "function", "experiment", "tau", "run_seed",
                  "mof", "bebc", "arr", "sr"]


class ConfigError(ValueError):
    """Raised for malformed or out-of-range configuration input."""


@dataclass
class SuiteConfig:
    functions: list[str] = field(default_factory=lambda: [l.value for l in Landscape])
    experiments: list[str] = field(default_factory=lambda: [e.value for e in Experiment])
    taus: list[float] = field(default_factory=lambda: [1.0, 5.0, 10.0, 20.0])
    methods: list[str] = field(default_factory=lambda: list(METHOD_NAMES))
    runs: int = 20
    num_changes: int = 100
    d: int = 30
    lower: float = -5.0
    upper: float = 5.0
    master_seed: int = 12345
    de: DEParams = field(default_factory=DEParams)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    crowding_n: int = 5
    rate_nonn: int = 7
    rate_nn: int = 2
    hyper_f_range: tuple[float, float] = (0.6, 0.8)
    hyper_cr: float = 0.7
    clock_mode: str = "virtual"
    cost_eval: float = DEFAULT_COST_EVAL
    cost_nn_train: float = DEFAULT_COST_NN_TRAIN
    cost_nn_predict: float = DEFAULT_COST_NN_PREDICT
    experiment_params: dict = field(default_factory=dict)
    best_known_restarts: int = 4
    best_known_budget: int = 20000
    generate_tables: bool = True
    workers: int | None = None


def method_setup(name: str, cfg: SuiteConfig) -> tuple[Reaction, Diversity]:
    """Reaction and diversity settings for one of the ten named methods."""
    if name not in METHOD_NAMES:
        raise ConfigError(f"unknown method '{name}'")
    use_nn, _, div_name = name.partition("_")
    nn = use_nn == "NN"
    rate = cfg.rate_nn if nn else cfg.rate_nonn
    reaction = Reaction(use_predictor=nn, n_p=cfg.predictor.n_p)
    if div_name == "No":
        div = Diversity(DiversityKind.NONE)
    elif div_name == "CwN":
        div = Diversity(DiversityKind.CROWDING, n_closest=cfg.crowding_n)
    elif div_name == "RI":
        div = Diversity(DiversityKind.RANDOM_IMMIGRANTS, rate=rate)
    elif div_name == "Rst":
        div = Diversity(DiversityKind.RESTART)
    else:
        div = Diversity(DiversityKind.HYPERMUTATION, rate=rate,
                        hyper_f_range=cfg.hyper_f_range, hyper_cr=cfg.hyper_cr)
    return reaction, div


def experiment_spec(name: str, cfg: SuiteConfig) -> ExperimentSpec:
    try:
        exp = Experiment(name)
    except ValueError:
        raise ConfigError(f"unknown experiment '{name}'") from None
    params = cfg.experiment_params.get(name, {})
    allowed = {"lk", "uk", "p", "noise_sigma", "p_range", "b0", "a"}
    for key in params:
        if key not in allowed:
            raise ConfigError(f"unknown key 'experiment_params.{name}.{key}'")
    kwargs = dict(params)
    if "p_range" in kwargs:
        kwargs["p_range"] = tuple(kwargs["p_range"])
    if "a" in kwargs and kwargs["a"] is not None:
        kwargs["a"] = tuple(kwargs["a"])
    try:
        return ExperimentSpec(exp, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"experiment_params.{name}: {exc}") from None


def derive_seed(master_seed: int, *parts) -> int:
    """Collision-resistant 64-bit seed from master seed plus coordinates."""
    key: list[int] = []
    for p in parts:
        if isinstance(p, bool):
            key.append(int(p))
        elif isinstance(p, int):
            key.append(p & 0xFFFFFFFF)
        elif isinstance(p, float):
            key.extend(struct.unpack("<II", struct.pack("<d", p)))
        else:
            digest = hashlib.sha256(str(p).encode()).digest()
            key.extend(struct.unpack("<II", digest[:8]))
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    a, b = (int(v) for v in ss.generate_state(2))
    return (a << 32) | b


def _set_range(target: dict, key: str, value, lo=None, hi=None, kind=float):
    try:
        v = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be a {kind.__name__}") from None
    if lo is not None and v < lo:
        raise ConfigError(f"'{key}' must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"'{key}' must be <= {hi}")
    target[key.rsplit(".", 1)[-1]] = v


def parse_config(text: str) -> SuiteConfig:
    """JSON text -> validated SuiteConfig with defaults filled in.

    Unknown keys are rejected by name; range violations get a message naming
    the offending key.
    """
    if not text.strip():
        doc = {}
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")

    top: dict = {}
    known_simple = {
        "runs": ("runs", 1, None, int),
        "num_changes": ("num_changes", 1, None, int),
        "d": ("d", 1, None, int),
        "master_seed": ("master_seed", None, None, int),
        "crowding_n": ("crowding_n", 1, None, int),
        "rate_nonn": ("rate_nonn", 0, None, int),
        "rate_nn": ("rate_nn", 0, None, int),
        "hyper_cr": ("hyper_cr", 0.0, 1.0, float),
        "workers": ("workers", 1, None, int),
    }
    for key, value in doc.items():
        if key in known_simple:
            _, lo, hi, kind = known_simple[key]
            _set_range(top, key, value, lo, hi, kind)
        elif key == "functions":
            names = [str(v) for v in value]
            for n in names:
                try:
                    Landscape(n)
                except ValueError:
                    raise ConfigError(f"unknown function '{n}'") from None
            top["functions"] = names
        elif key == "experiments":
            names = [str(v) for v in value]
            for n in names:
                try:
                    Experiment(n)
                except ValueError:
                    raise ConfigError(f"unknown experiment '{n}'") from None
            top["experiments"] = names
        elif key == "taus":
            taus = [float(v) for v in value]
            if not taus or any(t <= 0 for t in taus):
                raise ConfigError("'taus' must be a non-empty list of positive reals")
            top["taus"] = taus
        elif key == "methods":
            names = [str(v) for v in value]
            for n in names:
                if n not in METHOD_NAMES:
                    raise ConfigError(f"unknown method '{n}'")
            if len(set(names)) != len(names):
                raise ConfigError("'methods' contains duplicates")
            top["methods"] = names
        elif key == "bounds":
            lo, hi = float(value[0]), float(value[1])
            if lo >= hi:
                raise ConfigError("'bounds' must be [lower, upper] with lower < upper")
            top["lower"], top["upper"] = lo, hi
        elif key == "hyper_f_range":
            top["hyper_f_range"] = (float(value[0]), float(value[1]))
        elif key == "de":
            top["de"] = _parse_de(value)
        elif key == "predictor":
            top["predictor"] = _parse_predictor(value)
        elif key == "clock":
            _parse_clock(value, top)
        elif key == "experiment_params":
            if not isinstance(value, dict):
                raise ConfigError("'experiment_params' must be an object")
            top["experiment_params"] = value
        elif key == "best_known":
            _parse_best_known(value, top)
        else:
            raise ConfigError(f"unknown key '{key}'")

    cfg = SuiteConfig(**top)
    for name in cfg.experiments:
        experiment_spec(name, cfg)  # validates nested params early
    for name in cfg.methods:
        method_setup(name, cfg)
    if cfg.rate_nonn > cfg.de.population_size or cfg.rate_nn > cfg.de.population_size:
        raise ConfigError("replacement rates cannot exceed de.population_size")
    if cfg.predictor.n_p >= cfg.de.population_size:
        raise ConfigError("predictor.n_p must be smaller than de.population_size")
    return cfg


def _parse_de(value) -> DEParams:
    if not isinstance(value, dict):
        raise ConfigError("'de' must be an object")
    kwargs: dict = {}
    for key, v in value.items():
        if key == "population_size":
            _set_range(kwargs, "de.population_size", v, 4, None, int)
        elif key == "cr":
            _set_range(kwargs, "de.cr", v, 0.0, 1.0, float)
        elif key == "f_range":
            kwargs["f_range"] = (float(v[0]), float(v[1]))
        else:
            raise ConfigError(f"unknown key 'de.{key}'")
    try:
        return DEParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"de: {exc}") from None


def _parse_predictor(value) -> PredictorConfig:
    if not isinstance(value, dict):
        raise ConfigError("'predictor' must be an object")
    kwargs: dict = {}
    int_keys = {"k": 1, "history": 1, "min_batch": 1, "max_new_per_time": 1,
                "n_p": 1, "epochs": 1, "batch_size": 1}
    for key, v in value.items():
        if key in int_keys:
            _set_range(kwargs, f"predictor.{key}", v, int_keys[key], None, int)
        elif key in ("noise_sigma", "learning_rate"):
            _set_range(kwargs, f"predictor.{key}", v, 0.0, None, float)
        else:
            raise ConfigError(f"unknown key 'predictor.{key}'")
    return PredictorConfig(**kwargs)


def _parse_clock(value, top: dict) -> None:
    if not isinstance(value, dict):
        raise ConfigError("'clock' must be an object")
    for key, v in value.items():
        if key == "mode":
            if v not in ("virtual", "wall"):
                raise ConfigError("'clock.mode' must be 'virtual' or 'wall'")
            top["clock_mode"] = v
        elif key in ("cost_eval", "cost_nn_train", "cost_nn_predict"):
            _set_range(top, f"clock.{key}", v, 0.0, None, float)
        else:
            raise ConfigError(f"unknown key 'clock.{key}'")


def _parse_best_known(value, top: dict) -> None:
    if not isinstance(value, dict):
        raise ConfigError("'best_known' must be an object")
    for key, v in value.items():
        if key == "restarts":
            _set_range(top, "best_known_restarts", v, 1, None, int)
        elif key == "budget_per_time":
            _set_range(top, "best_known_budget", v, 100, None, int)
        elif key == "generate":
            if not isinstance(v, bool):
                raise ConfigError("'best_known.generate' must be true or false")
            top["generate_tables"] = v
        else:
            raise ConfigError(f"unknown key 'best_known.{key}'")


def cell_name(method: str, function: str, experiment: str, tau: float) -> str:
    return f"{method}__{function}__{experiment}__tau{tau:g}"


def table_name(function: str, experiment: str) -> str:
    return f"{function}_{experiment}"


@dataclass
class RunRow:
    method: str
    function: str
    experiment: str
    tau: float
    run_seed: int
    report: MetricReport
    nn_fraction: float
    trace_path: str


@dataclass
class SuiteResult:
    rows: list[RunRow] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def sorted_rows(self) -> list[RunRow]:
        return sorted(self.rows, key=lambda r: (r.method, r.function,
                                                r.experiment, r.tau, r.run_seed))


@dataclass
class _Job:
    method: str
    function: str
    experiment: str
    tau: float
    run_cfg: RunConfig
    trace_path: str


def _execute_job(job: _Job) -> RunRow:
    trace = run_dynamic(job.run_cfg)
    os.makedirs(os.path.dirname(job.trace_path), exist_ok=True)
    trace.write_csv(job.trace_path)
    report = compute_report(trace)
    frac = trace.nn_seconds / trace.total_seconds if trace.total_seconds > 0 else 0.0
    return RunRow(job.method, job.function, job.experiment, job.tau,
                  job.run_cfg.seed, report, frac, job.trace_path)


def ensure_best_known(cfg: SuiteConfig, out_dir: str, quiet: bool = True,
                      force: bool = False) -> dict[tuple[str, str], BestKnownTable]:
    """Load or generate the per-(function, experiment) reference tables.

    Environment trajectories depend only on the experiment and master seed,
    never on tau or method, so one table serves every tau cell.
    """
    bk_dir = os.path.join(out_dir, "best_known")
    os.makedirs(bk_dir, exist_ok=True)
    tables: dict[tuple[str, str], BestKnownTable] = {}
    for function in cfg.functions:
        for experiment in cfg.experiments:
            path = os.path.join(bk_dir, table_name(function, experiment) + ".csv")
            if os.path.exists(path) and not force:
                tables[(function, experiment)] = BestKnownTable.read_csv(path)
                continue
            if not cfg.generate_tables and not force:
                raise ConfigError(
                    f"best-known table missing for {function}/{experiment} "
                    "and generation is disabled")
            if not quiet:
                print(f"generating best-known table {function}/{experiment} ...")
            traj = _trajectory_for(cfg, function, experiment)
            table = generate_best_known(
                traj, Landscape(function), cfg.d, cfg.lower, cfg.upper,
                seed=derive_seed(cfg.master_seed, "best_known", function, experiment),
                restarts=cfg.best_known_restarts,
                budget_per_time=cfg.best_known_budget)
            table.write_csv(path)
            tables[(function, experiment)] = table
    return tables


def _trajectory_for(cfg: SuiteConfig, function: str, experiment: str):
    spec = experiment_spec(experiment, cfg)
    env_rng = make_rng(derive_seed(cfg.master_seed, "env", experiment), STREAM_ENV)
    return build_trajectory(spec, Landscape(function), cfg.d, cfg.num_changes,
                            env_rng, cfg.upper)


def run_suite(cfg: SuiteConfig, out_dir: str, quiet: bool = False) -> SuiteResult:
    """Execute the whole grid and persist traces plus summary CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    tables = ensure_best_known(cfg, out_dir, quiet=quiet)
    trajectories = {
        (f, e): _trajectory_for(cfg, f, e)
        for f in cfg.functions for e in cfg.experiments
    }
    jobs: list[_Job] = []
    for function in cfg.functions:
        for experiment in cfg.experiments:
            spec = experiment_spec(experiment, cfg)
            for tau in cfg.taus:
                for method in cfg.methods:
                    reaction, diversity = method_setup(method, cfg)
                    cell = cell_name(method, function, experiment, tau)
                    for run_idx in range(cfg.runs):
                        seed = derive_seed(cfg.master_seed, method, function,
                                           experiment, tau, run_idx)
                        run_cfg = RunConfig(
                            landscape=Landscape(function), experiment=spec,
                            d=cfg.d, lower=cfg.lower, upper=cfg.upper,
                            de=cfg.de, diversity=diversity, reaction=reaction,
                            predictor=cfg.predictor,
                            num_changes=cfg.num_changes, tau=tau,
                            clock_mode=cfg.clock_mode, cost_eval=cfg.cost_eval,
                            cost_nn_train=cfg.cost_nn_train,
                            cost_nn_predict=cfg.cost_nn_predict,
                            seed=seed,
                            trajectory=trajectories[(function, experiment)],
                            best_known=tables[(function, experiment)])
                        trace_path = os.path.join(out_dir, "traces", cell,
                                                  f"{seed}.csv")
                        jobs.append(_Job(method, function, experiment, tau,
                                         run_cfg, trace_path))

    result = SuiteResult()
    workers = cfg.workers or os.cpu_count() or 1
    workers = min(workers, len(jobs)) if jobs else 1
    if workers <= 1:
        for job in jobs:
            _collect(result, job, _execute_job, quiet)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_execute_job, job): job for job in jobs}
            for future, job in futures.items():
                _collect(result, job, lambda _: future.result(), quiet)

    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), result.sorted_rows())
    write_nn_time_csv(os.path.join(out_dir, "nn_time.csv"), result.sorted_rows())
    return result


def _collect(result: SuiteResult, job: _Job, runner, quiet: bool) -> None:
    try:
        row = runner(job)
    except Exception as exc:  # keep the suite going; record the failure
        result.failures.append(
            f"{cell_name(job.method, job.function, job.experiment, job.tau)}"
            f"/{job.run_cfg.seed}: {exc}")
        return
    result.rows.append(row)
    if not quiet:
        print(f"done {cell_name(job.method, job.function, job.experiment, job.tau)}"
              f" seed={job.run_cfg.seed}")


def write_metrics_csv(path: str, rows: list[RunRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_HEADER)
        for r in rows:
            w.writerow([r.method, r.function, r.experiment, f"{r.tau:g}",
                        r.run_seed, f"{r.report.mof:.17g}", f"{r.report.bebc:.17g}",
                        f"{r.report.arr:.17g}", f"{r.report.sr:.17g}"])


def write_nn_time_csv(path: str, rows: list[RunRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "function", "experiment", "tau", "run_seed",
                    "nn_fraction"])
        for r in rows:
            w.writerow([r.method, r.function, r.experiment, f"{r.tau:g}",
                        r.run_seed, f"{r.nn_fraction:.17g}"])


def recompute_metrics(out_dir: str) -> list[list[str]]:
    """Rebuild metric rows from the trace files under out_dir/traces."""
    traces_dir = os.path.join(out_dir, "traces")
    if not os.path.isdir(traces_dir):
        raise ConfigError(f"no traces directory under {out_dir}")
    out_rows = []
    for cell in sorted(os.listdir(traces_dir)):
        parts = cell.split("__")
        if len(parts) != 4 or not parts[3].startswith("tau"):
            continue
        method, function, experiment = parts[0], parts[1], parts[2]
        tau = float(parts[3][3:])
        cell_dir = os.path.join(traces_dir, cell)
        for name in sorted(os.listdir(cell_dir)):
            if not name.endswith(".csv"):
                continue
            trace = RunTrace.read_csv(os.path.join(cell_dir, name))
            report = compute_report(trace)
            out_rows.append([method, function, experiment, f"{tau:g}",
                             int(name[:-4]), f"{report.mof:.17g}",
                             f"{report.bebc:.17g}", f"{report.arr:.17g}",
                             f"{report.sr:.17g}"])
    out_rows.sort(key=lambda r: (r[0], r[1], r[2], float(r[3]), int(r[4])))
    return out_rows


def rank_from_metrics(metrics_path: str) -> list[list[str]]:
    """Mean ranks per method over (function, experiment, tau) cells.

    Per cell, each method's metric is the mean over its runs; ranking is 1 =
    best (lowest) with average ranks on ties. Produces one row per method
    with mean ranks for mof and arr.
    """
    with open(metrics_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header != METRICS_HEADER:
        raise ConfigError(f"{metrics_path} does not look like a metrics CSV")
    acc: dict[str, dict[str, list[tuple[float, float]]]] = {}
    for row in rows:
        method, function, experiment, tau = row[0], row[1], row[2], row[3]
        cell = f"{function}__{experiment}__tau{tau}"
        acc.setdefault(method, {}).setdefault(cell, []).append(
            (float(row[5]), float(row[7])))
    mof_values = {m: {c: float(np.mean([v[0] for v in vs]))
                      for c, vs in cells.items()}
                  for m, cells in acc.items()}
    arr_values = {m: {c: float(np.mean([v[1] for v in vs]))
                      for c, vs in cells.items()}
                  for m, cells in acc.items()}
    mof_ranks, warn1 = mean_ranks(mof_values)
    # arr: larger is better, rank the negated values
    arr_ranks, warn2 = mean_ranks({m: {c: -v for c, v in cells.items()}
                                   for m, cells in arr_values.items()})
    for w in warn1 + warn2:
        print(f"warning: {w}", file=sys.stderr)
    out = [[m, f"{mof_ranks[m]:.17g}", f"{arr_ranks[m]:.17g}"]
           for m in sorted(mof_ranks)]
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dynde",
                     description="dynamic constrained DE experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults apply if omitted)")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--clock", choices=["wall", "virtual"],
                       help="override clock mode")
        p.add_argument("--tau", help="comma-separated list, overrides taus")
        p.add_argument("--methods", help="comma-separated list, overrides methods")
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("run", help="run the configured suite"))
    common(sub.add_parser("best-known", help="generate reference tables"))
    p_metrics = sub.add_parser("metrics", help="recompute metrics from traces")
    p_metrics.add_argument("--out", default="results")
    p_metrics.add_argument("--quiet", action="store_true")
    p_rank = sub.add_parser("rank", help="mean-rank table from metrics.csv")
    p_rank.add_argument("--out", default="results")
    p_rank.add_argument("--quiet", action="store_true")
    return parser


def _load_config(args) -> SuiteConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = parse_config("")
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.clock:
        cfg = replace(cfg, clock_mode=args.clock)
    if args.tau:
        taus = [float(v) for v in args.tau.split(",") if v]
        if not taus or any(t <= 0 for t in taus):
            raise ConfigError("--tau needs positive values")
        cfg = replace(cfg, taus=taus)
    if args.methods:
        names = [v for v in args.methods.split(",") if v]
        for n in names:
            if n not in METHOD_NAMES:
                raise ConfigError(f"unknown method '{n}'")
        cfg = replace(cfg, methods=names)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load_config(args)
            result = run_suite(cfg, args.out, quiet=args.quiet)
            for failure in result.failures:
                print(f"failed: {failure}", file=sys.stderr)
            if not args.quiet:
                print(f"{len(result.rows)} runs complete, "
                      f"{len(result.failures)} failures; CSVs in {args.out}")
            return 2 if result.failures else 0
        if args.command == "best-known":
            cfg = _load_config(args)
            ensure_best_known(cfg, args.out, quiet=args.quiet, force=True)
            if not args.quiet:
                print(f"best-known tables written under {args.out}/best_known")
            return 0
        if args.command == "metrics":
            rows = recompute_metrics(args.out)
            path = os.path.join(args.out, "metrics.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(METRICS_HEADER)
                w.writerows(rows)
            if not args.quiet:
                print(f"{len(rows)} metric rows rewritten to {path}")
            return 0
        if args.command == "rank":
            rows = rank_from_metrics(os.path.join(args.out, "metrics.csv"))
            path = os.path.join(args.out, "ranks.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["method", "mean_rank_mof", "mean_rank_arr"])
                w.writerows(rows)
            if not args.quiet:
                print(f"rank table written to {path}")
            return 0
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
