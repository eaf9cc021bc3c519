"""Evolution loop for dynamic constrained problems.

DE/rand/1/bin with feasibility-rule selection runs against a clock; when the
clock crosses a period boundary the environment silently advances, and the
algorithm notices only through sentinel re-evaluation. On detection it can
inject diversity (crowding handles this during selection instead), optionally
inject predicted-optimum neighbors, and re-evaluates the population.

The clock has two modes. Wall mode reads real elapsed time; virtual mode
charges a configured cost per objective evaluation and per network
training/prediction call, which makes runs deterministic and
hardware-independent.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (
    STREAM_DE,
    STREAM_DIVERSITY,
    STREAM_ENV,
    STREAM_PREDICTOR,
    Evaluation,
    Individual,
    Population,
    clamp_to_bounds,
    is_better,
    make_rng,
    rank_worst_first,
)
from .metrics import GenRecord, RunTrace
from .predictor import OptimumPredictor, PredictorConfig
from . import problems
from .problems import (
    BestKnownTable,
    EnvironmentState,
    ExperimentSpec,
    Landscape,
    build_trajectory,
)

# Virtual-clock defaults. One evaluation at 4.7e-4 s puts both reported
# per-period totals inside ten percent: 2128 evaluations at tau=1 (target
# about 2000) and 42553 at tau=20 (target about 45000). A training or
# prediction call is charged a flat cost; together they hold the network's
# share of a period near 10% at tau=1 and near 0.5% at tau=20.
DEFAULT_COST_EVAL = 4.7e-4
DEFAULT_COST_NN_TRAIN = 0.10
DEFAULT_COST_NN_PREDICT = 0.02


@dataclass(frozen=True)
class DEParams:
    population_size: int = 20
    cr: float = 0.3
    f_range: tuple[float, float] = (0.2, 0.8)

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be at least 4 for rand/1")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        lo, hi = self.f_range
        if not (0.0 < lo <= hi <= 2.0):
            raise ValueError("f_range must satisfy 0 < low <= high <= 2")


class DiversityKind(Enum):
    NONE = "none"
    CROWDING = "crowding"
    RANDOM_IMMIGRANTS = "random_immigrants"
    RESTART = "restart"
    HYPERMUTATION = "hypermutation"


@dataclass(frozen=True)
class Diversity:
    """Population-perturbation policy paired with the DE loop.

    Crowding acts during selection every generation; the other kinds act only
    when a change is detected. ``hyper_generations`` of None means the
    hyper-mutation window is derived from tau at reaction time.
    """

    kind: DiversityKind = DiversityKind.NONE
    n_closest: int = 5
    rate: int = 7
    hyper_f_range: tuple[float, float] = (0.6, 0.8)
    hyper_cr: float = 0.7
    hyper_generations: int | None = None

    def __post_init__(self) -> None:
        if self.n_closest < 1:
            raise ValueError("n_closest must be >= 1")
        if self.rate < 0:
            raise ValueError("rate must be >= 0")


@dataclass(frozen=True)
class Reaction:
    """What happens on detection: plain re-evaluation, or prediction first."""

    use_predictor: bool = False
    n_p: int = 5


class HyperState:
    """Countdown of generations still running on hyper-mutation parameters."""

    def __init__(self) -> None:
        self.generations_remaining = 0

    @property
    def active(self) -> bool:
        return self.generations_remaining > 0

    def activate(self, generations: int) -> None:
        self.generations_remaining = generations

    def tick(self) -> None:
        if self.generations_remaining > 0:
            self.generations_remaining -= 1


def hyper_params_current(params: DEParams, diversity: Diversity,
                         hyper: HyperState) -> tuple[tuple[float, float], float]:
    """Effective (F range, CR): hyper values while active, base otherwise."""
    if hyper.active:
        return diversity.hyper_f_range, diversity.hyper_cr
    return params.f_range, params.cr


class Clock:
    """Budget model driving environment changes.

    ``time_index`` is floor(elapsed / tau). Virtual mode advances elapsed
    only through explicit charges, one per objective evaluation plus flat
    costs per network training and prediction call; wall mode reads the real
    clock and merely measures network time.
    """

    def __init__(self, tau: float, mode: str = "virtual",
                 cost_eval: float = DEFAULT_COST_EVAL,
                 cost_nn_train: float = DEFAULT_COST_NN_TRAIN,
                 cost_nn_predict: float = DEFAULT_COST_NN_PREDICT):
        if tau <= 0:
            raise ValueError("tau must be positive")
        if mode not in ("virtual", "wall"):
            raise ValueError("clock mode must be 'virtual' or 'wall'")
        self.tau = tau
        self.mode = mode
        self.cost_eval = cost_eval
        self.cost_nn_train = cost_nn_train
        self.cost_nn_predict = cost_nn_predict
        self._elapsed = 0.0
        self._wall_start: float | None = None
        self.eval_count = 0
        self.nn_seconds = 0.0

    def start(self) -> None:
        self._wall_start = time.perf_counter()

    def now(self) -> float:
        if self.mode == "virtual":
            return self._elapsed
        if self._wall_start is None:
            raise RuntimeError("wall clock read before start()")
        return time.perf_counter() - self._wall_start

    def time_index(self) -> int:
        return int(math.floor(self.now() / self.tau))

    def eval_tick(self) -> None:
        self.eval_count += 1
        if self.mode == "virtual":
            self._elapsed += self.cost_eval

    @contextmanager
    def nn_train_block(self):
        yield from self._nn_block(self.cost_nn_train)

    @contextmanager
    def nn_predict_block(self):
        yield from self._nn_block(self.cost_nn_predict)

    def _nn_block(self, virtual_cost: float):
        if self.mode == "virtual":
            yield
            self._elapsed += virtual_cost
            self.nn_seconds += virtual_cost
        else:
            t0 = time.perf_counter()
            yield
            self.nn_seconds += time.perf_counter() - t0


def mutant_rand_1(pop: Population, i: int, f: float, rng: np.random.Generator,
                  lower: float, upper: float) -> np.ndarray:
    """rand/1 mutant: x_r0 + f * (x_r1 - x_r2), indices distinct and != i."""
    np_size = len(pop)
    if np_size < 4:
        raise ValueError("rand/1 mutation needs a population of at least 4")
    r0 = r1 = r2 = i
    while r0 == i:
        r0 = int(rng.integers(np_size))
    while r1 == i or r1 == r0:
        r1 = int(rng.integers(np_size))
    while r2 == i or r2 == r0 or r2 == r1:
        r2 = int(rng.integers(np_size))
    v = pop[r0].x + f * (pop[r1].x - pop[r2].x)
    return clamp_to_bounds(v, lower, upper)


def crossover_binomial(target: np.ndarray, mutant: np.ndarray, cr: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover with one forced mutant coordinate."""
    d = target.size
    mask = rng.random(d) < cr
    mask[int(rng.integers(d))] = True
    return np.where(mask, mutant, target)


def de_generation(pop: Population, params: DEParams, evaluate, diversity: Diversity,
                  hyper: HyperState, rng: np.random.Generator,
                  lower: float, upper: float) -> Population:
    """One generation over the whole population, replacements in place.

    With crowding, each trial competes against the nearest member it can
    beat among its n_closest Euclidean neighbors; otherwise it must strictly
    beat its own target. Ties keep the incumbent.
    """
    np_size = len(pop)
    f_range, cr = hyper_params_current(params, diversity, hyper)
    crowding = diversity.kind is DiversityKind.CROWDING
    if crowding:
        X = np.stack([ind.x for ind in pop])
    for i in range(np_size):
        f = float(rng.uniform(*f_range))
        mutant = mutant_rand_1(pop, i, f, rng, lower, upper)
        trial = crossover_binomial(pop[i].x, mutant, cr, rng)
        ev = evaluate(trial)
        if crowding:
            diff = X - trial
            order = np.argsort(np.einsum("nd,nd->n", diff, diff), kind="stable")
            for j in order[:diversity.n_closest]:
                if is_better(ev, pop[j].ev):
                    pop[j] = Individual(trial, ev)
                    X[j] = trial
                    break
        else:
            if is_better(ev, pop[i].ev):
                pop[i] = Individual(trial, ev)
    hyper.tick()
    return pop


def sentinel_indices(np_size: int) -> tuple[int, int]:
    return 0, np_size // 2


def detect_change(pop: Population, evaluate) -> bool:
    """Re-evaluate the first and middle member; compare against their cache.

    Returns True on any exact difference in objective, violation, or the raw
    signed constraint value. The raw value matters: a constraint boundary
    that moves away from a feasible sentinel leaves the clamped violation at
    zero on both sides, and only the signed slack gives the move away. The
    fresh evaluations replace the cached ones either way.
    """
    changed = False
    for idx in sentinel_indices(len(pop)):
        old = pop[idx].ev
        fresh = evaluate(pop[idx].x)
        if (fresh.objective != old.objective
                or fresh.violation != old.violation
                or fresh.constraint_value != old.constraint_value):
            changed = True
        pop[idx] = Individual(pop[idx].x, fresh)
    return changed


def react(pop: Population, reaction: Reaction, diversity: Diversity, evaluate,
          predictor: OptimumPredictor | None, hyper: HyperState, clock: Clock,
          rng_div: np.random.Generator, lower: float, upper: float,
          current_t: int) -> Population:
    """Reaction to a detected change.

    Step 1 applies the diversity action, step 2 injects predicted neighbors
    in place of the worst untouched members, step 3 re-evaluates everything
    not already evaluated at the current time index. Worst/best ranking uses
    the evaluations from before the change; that is all the algorithm knows.
    """
    np_size = len(pop)
    d = pop[0].x.size
    replaced: list[int] = []
    if diversity.kind in (DiversityKind.RANDOM_IMMIGRANTS, DiversityKind.HYPERMUTATION):
        replaced = rank_worst_first(pop)[:diversity.rate]
        for idx in replaced:
            pop[idx] = Individual(rng_div.uniform(lower, upper, d))
        if diversity.kind is DiversityKind.HYPERMUTATION:
            duration = diversity.hyper_generations
            if duration is None:
                duration = max(1, round(6.0 * clock.tau))
            hyper.activate(duration)
    elif diversity.kind is DiversityKind.RESTART:
        replaced = rank_worst_first(pop)
        for idx in range(np_size):
            pop[idx] = Individual(rng_div.uniform(lower, upper, d))

    if reaction.use_predictor and predictor is not None and predictor.trained:
        untouched = set(range(np_size)) - set(replaced)
        targets = [i for i in rank_worst_first(pop) if i in untouched]
        targets = targets[:reaction.n_p]
        if len(targets) < reaction.n_p:
            targets += replaced[:reaction.n_p - len(targets)]
        with clock.nn_predict_block():
            positions = predictor.predict_neighbors()
        for idx, x in zip(targets, positions):
            pop[idx] = Individual(np.asarray(x, dtype=float))

    for i in range(np_size):
        ind = pop[i]
        if ind.ev is None or ind.ev.time_index < current_t:
            pop[i] = Individual(ind.x, evaluate(ind.x))
    return pop


@dataclass
class RunConfig:
    landscape: Landscape
    experiment: ExperimentSpec
    d: int = 30
    lower: float = -5.0
    upper: float = 5.0
    de: DEParams = field(default_factory=DEParams)
    diversity: Diversity = field(default_factory=Diversity)
    reaction: Reaction = field(default_factory=Reaction)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    num_changes: int = 100
    tau: float = 1.0
    clock_mode: str = "virtual"
    cost_eval: float = DEFAULT_COST_EVAL
    cost_nn_train: float = DEFAULT_COST_NN_TRAIN
    cost_nn_predict: float = DEFAULT_COST_NN_PREDICT
    seed: int = 0
    env_seed: int | None = None
    trajectory: list[EnvironmentState] | None = None
    best_known: BestKnownTable | None = None


def run_dynamic(cfg: RunConfig) -> RunTrace:
    """Full dynamic run; returns one trace row per generation.

    Rows are keyed by the algorithm's detected period: the period label
    advances when a change is detected and reacted to, so best-so-far values
    stay monotone within each label. Evaluations themselves always use the
    environment at the evaluation instant.
    """
    de_rng = make_rng(cfg.seed, STREAM_DE)
    div_rng = make_rng(cfg.seed, STREAM_DIVERSITY)
    env_seed = cfg.seed if cfg.env_seed is None else cfg.env_seed
    traj = cfg.trajectory
    if traj is None:
        traj = build_trajectory(cfg.experiment, cfg.landscape, cfg.d,
                                cfg.num_changes, make_rng(env_seed, STREAM_ENV),
                                cfg.upper)
    if len(traj) < cfg.num_changes:
        raise ValueError("trajectory shorter than num_changes")

    clock = Clock(cfg.tau, cfg.clock_mode, cfg.cost_eval,
                  cfg.cost_nn_train, cfg.cost_nn_predict)
    predictor = None
    if cfg.reaction.use_predictor:
        predictor = OptimumPredictor(cfg.d, cfg.predictor, cfg.lower, cfg.upper,
                                     make_rng(cfg.seed, STREAM_PREDICTOR))
    hyper = HyperState()
    trace = RunTrace()
    last_index = cfg.num_changes - 1
    period_best: Evaluation | None = None

    def evaluate(x: np.ndarray) -> Evaluation:
        nonlocal period_best
        t = clock.time_index()
        state = traj[t if t < last_index else last_index]
        ev = problems.evaluate(state, cfg.landscape, x)
        clock.eval_tick()
        if period_best is None or is_better(ev, period_best):
            period_best = ev
        return ev

    clock.start()
    X0 = de_rng.uniform(cfg.lower, cfg.upper, size=(cfg.de.population_size, cfg.d))
    pop: Population = [Individual(X0[i].copy()) for i in range(cfg.de.population_size)]
    for i, ind in enumerate(pop):
        pop[i] = Individual(ind.x, evaluate(ind.x))

    period = 0
    gen_in_period = 0
    slow_warned = False
    s0, s1 = sentinel_indices(len(pop))

    while clock.time_index() < cfg.num_changes:
        gen_start = clock.now()
        before0, before1 = pop[s0], pop[s1]
        changed = detect_change(pop, evaluate)
        if changed:
            new_t = min(clock.time_index(), last_index)
            if predictor is not None:
                finished = list(pop)
                finished[s0], finished[s1] = before0, before1
                predictor.observe(period, finished)
                predictor.ingest_new_samples()
                if predictor.ready:
                    with clock.nn_train_block():
                        predictor.fit()
            period_best = None
            react(pop, cfg.reaction, cfg.diversity, evaluate, predictor, hyper,
                  clock, div_rng, cfg.lower, cfg.upper, new_t)
            for ind in pop:
                if period_best is None or is_better(ind.ev, period_best):
                    period_best = ind.ev
            period = new_t
            gen_in_period = 0

        de_generation(pop, cfg.de, evaluate, cfg.diversity, hyper, de_rng,
                      cfg.lower, cfg.upper)
        gen_in_period += 1
        assert period_best is not None
        if cfg.best_known is not None and period in cfg.best_known:
            f_star = cfg.best_known.f_star(period)
            error = abs(f_star - period_best.objective)
        else:
            f_star = float("nan")
            error = float("nan")
        trace.records.append(GenRecord(period, gen_in_period, clock.now(),
                                       clock.eval_count, period_best.objective,
                                       period_best.violation, f_star, error))
        if (cfg.clock_mode == "wall" and not slow_warned
                and clock.now() - gen_start > cfg.tau):
            trace.warnings.append(
                f"one generation took longer than tau={cfg.tau}s; "
                "period budgets cannot be met on this machine")
            slow_warned = True

    trace.eval_count = clock.eval_count
    trace.nn_seconds = clock.nn_seconds
    trace.total_seconds = clock.now()
    return trace
