"""Dynamic constrained test problems.

A problem couples a base landscape (sphere, rosenbrock, rastrigin), evaluated
relative to a moving offset, with a single linear inequality constraint
``sum(a_i * x_i) <= b`` whose right-hand side or offset changes over time.
Four change patterns are provided:

* ``exp1``  random walk on b (uniform steps)
* ``exp2``  sinusoidal recurrence on b with gaussian noise
* ``exp3``  deterministic offset drift, growing with time
* ``exp4``  oscillating offset with randomly drawn amplitude

Environment states for a whole run are materialised up front with
:func:`build_trajectory`, so every algorithm variant sees the identical
sequence of problems and best-known tables remain valid across variants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    STREAM_BEST_KNOWN,
    Evaluation,
    clamp_to_bounds,
    is_better,
)


class Landscape(Enum):
    SPHERE = "sphere"
    ROSENBROCK = "rosenbrock"
    RASTRIGIN = "rastrigin"


class Experiment(Enum):
    EXP1 = "exp1"
    EXP2 = "exp2"
    EXP3 = "exp3"
    EXP4 = "exp4"


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters of one change pattern.

    ``b0`` and ``a`` may be left unset; :func:`initial_state` then derives the
    defaults (coefficients of ones, and a right-hand side that starts two
    units of slack away from the initial optimum for exp1/exp2, or far enough
    to stay inactive for exp3/exp4).
    """

    experiment: Experiment
    lk: float = -1.0
    uk: float = 1.0
    p: float = 1.0
    noise_sigma: float = 0.5
    p_range: tuple[float, float] = (0.5, 3.0)
    b0: float | None = None
    a: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.lk < self.uk:
            raise ValueError("lk must be < uk")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.p_range[0] < self.p_range[1]:
            raise ValueError("p_range must be (low, high) with low < high")


@dataclass(frozen=True)
class EnvironmentState:
    """Frozen snapshot of the problem at one time index."""

    time_index: int
    offset: np.ndarray
    b: float
    a: np.ndarray
    p_t: float = 0.0


def eval_base(landscape: Landscape, z: np.ndarray) -> float:
    """Base objective at the shifted point z = x - offset."""
    if landscape is Landscape.SPHERE:
        return float(z @ z)
    if landscape is Landscape.ROSENBROCK:
        zc = z[:-1]
        zn = z[1:]
        return float(np.sum(100.0 * (zn - zc * zc) ** 2 + (1.0 - zc) ** 2))
    # rastrigin
    return float(10.0 * z.size + np.sum(z * z - 10.0 * np.cos(2.0 * math.pi * z)))


def base_optimum(landscape: Landscape, d: int) -> np.ndarray:
    """Unconstrained minimiser of the base landscape in shifted coordinates."""
    if landscape is Landscape.ROSENBROCK:
        return np.ones(d)
    return np.zeros(d)


def evaluate(state: EnvironmentState, landscape: Landscape, x: np.ndarray) -> Evaluation:
    """Objective and constraint violation of x under one environment state."""
    f = eval_base(landscape, x - state.offset)
    slack = float(state.a @ x) - state.b
    v = slack if slack > 0.0 else 0.0
    return Evaluation(f, v, state.time_index, constraint_value=slack)


def initial_state(spec: ExperimentSpec, landscape: Landscape, d: int,
                  upper: float = 5.0) -> EnvironmentState:
    """State at time 0, with defaulted constraint coefficients."""
    a = np.ones(d) if spec.a is None else np.asarray(spec.a, dtype=float)
    offset = np.zeros(d)
    if spec.b0 is not None:
        b0 = spec.b0
    else:
        opt = offset + base_optimum(landscape, d)
        if spec.experiment in (Experiment.EXP1, Experiment.EXP2):
            # near-active start: two units of slack at the initial optimum
            b0 = float(a @ opt) + 2.0
        else:
            # offset experiments keep the constraint out of play
            b0 = float(np.sum(np.abs(a)) * upper) + 1.0
    return EnvironmentState(0, offset, b0, a)


def advance_environment(state: EnvironmentState, spec: ExperimentSpec,
                        rng: np.random.Generator) -> EnvironmentState:
    """One environment change. exp3 consumes no random draws."""
    t = state.time_index
    exp = spec.experiment
    if exp is Experiment.EXP1:
        b = state.b + float(rng.uniform(spec.lk, spec.uk))
        return EnvironmentState(t + 1, state.offset, b, state.a)
    if exp is Experiment.EXP2:
        b = spec.p * math.sin(state.b) + float(rng.normal(0.0, spec.noise_sigma))
        return EnvironmentState(t + 1, state.offset, b, state.a)
    if exp is Experiment.EXP3:
        offset = state.offset + 0.1 * t
        return EnvironmentState(t + 1, offset, state.b, state.a)
    # exp4: fresh amplitude each change, oscillating direction
    p_t = float(rng.uniform(*spec.p_range))
    offset = state.offset + p_t * math.sin(math.pi / 2.0 * t)
    return EnvironmentState(t + 1, offset, state.b, state.a, p_t)


def build_trajectory(spec: ExperimentSpec, landscape: Landscape, d: int,
                     num_changes: int, rng: np.random.Generator,
                     upper: float = 5.0) -> list[EnvironmentState]:
    """Environment states for time indices 0 .. num_changes-1."""
    states = [initial_state(spec, landscape, d, upper)]
    while len(states) < num_changes:
        states.append(advance_environment(states[-1], spec, rng))
    return states


class BestKnownTable:
    """Reference optima per time index, used for error measurements.

    Rows map a time index to (f_star, x_star). Stored positions are feasible
    up to a 1e-9 violation tolerance.
    """

    def __init__(self, d: int):
        self.d = d
        self._rows: dict[int, tuple[float, np.ndarray]] = {}

    def put(self, t: int, f_star: float, x_star: np.ndarray) -> None:
        self._rows[t] = (float(f_star), np.asarray(x_star, dtype=float))

    def f_star(self, t: int) -> float:
        return self._rows[t][0]

    def x_star(self, t: int) -> np.ndarray:
        return self._rows[t][1]

    def __contains__(self, t: int) -> bool:
        return t in self._rows

    def times(self) -> list[int]:
        return sorted(self._rows)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "f_star"] + [f"x_{i + 1}" for i in range(self.d)])
            for t in self.times():
                f_star, x = self._rows[t]
                w.writerow([t, f"{f_star:.17g}"] + [f"{xi:.17g}" for xi in x])

    @classmethod
    def read_csv(cls, path) -> "BestKnownTable":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        d = len(header) - 2
        table = cls(d)
        for row in rows[1:]:
            t = int(row[0])
            f_star = float(row[1])
            x = np.array([float(v) for v in row[2:]])
            table.put(t, f_star, x)
        return table


_EXPLORE_EVALS = 2500


def _frozen_de(state: EnvironmentState, landscape: Landscape, d: int,
               lower: float, upper: float, rng: np.random.Generator,
               max_evals: int) -> tuple[float, np.ndarray, float]:
    """DE with feasibility-rule selection on one frozen environment state.

    Two phases: rand/1/bin with CR=0.3 for the first _EXPLORE_EVALS
    evaluations (global), then best/1/bin with CR=0.9 (refinement).
    Infeasible trials are repaired by projecting onto the constraint plane,
    which is what makes boundary optima recoverable to high accuracy.

    The phase switch sits at an absolute evaluation count so a run with a
    larger budget replays the shorter run exactly and then continues;
    best-of-run can therefore only improve as the budget grows.

    Kept self-contained so table generation does not depend on the dynamic
    engine. Returns (objective, position, violation) of the best found.
    """
    np_size = 20
    a = state.a
    a_norm2 = float(a @ a)
    X = rng.uniform(lower, upper, size=(np_size, d))
    evs = [evaluate(state, landscape, X[i]) for i in range(np_size)]
    evals = np_size
    while evals < max_evals:
        refine = evals >= _EXPLORE_EVALS
        cr = 0.9 if refine else 0.3
        best = 0
        if refine:
            for i in range(1, np_size):
                if is_better(evs[i], evs[best]):
                    best = i
        for i in range(np_size):
            if evals >= max_evals:
                break
            r0 = r1 = r2 = i
            while r0 == i:
                r0 = int(rng.integers(np_size))
            while r1 == i or r1 == r0:
                r1 = int(rng.integers(np_size))
            while r2 == i or r2 == r0 or r2 == r1:
                r2 = int(rng.integers(np_size))
            f = float(rng.uniform(0.2, 0.8))
            base = X[best] if refine else X[r0]
            v = base + f * (X[r1] - X[r2])
            mask = rng.random(d) < cr
            mask[int(rng.integers(d))] = True
            trial = np.where(mask, v, X[i])
            slack = float(a @ trial) - state.b
            if slack > 0.0 and a_norm2 > 0.0:
                trial = trial - a * (slack / a_norm2)
            trial = clamp_to_bounds(trial, lower, upper)
            ev = evaluate(state, landscape, trial)
            evals += 1
            if is_better(ev, evs[i]):
                X[i] = trial
                evs[i] = ev
    best = 0
    for i in range(1, np_size):
        if is_better(evs[i], evs[best]):
            best = i
    return evs[best].objective, X[best].copy(), evs[best].violation


def generate_best_known(trajectory: list[EnvironmentState], landscape: Landscape,
                        d: int, lower: float, upper: float, seed: int,
                        restarts: int = 4, budget_per_time: int = 20000) -> BestKnownTable:
    """Best-known table from repeated frozen-environment DE restarts.

    Deterministic for a given seed. Each time index gets ``restarts``
    independent runs sharing ``budget_per_time`` evaluations; the
    feasibility-best result is recorded.
    """
    table = BestKnownTable(d)
    per_restart = max(1, budget_per_time // max(1, restarts))
    for state in trajectory:
        best: tuple[float, np.ndarray, float] | None = None
        for r in range(restarts):
            # one generator per (seed, t, restart), platform stable
            ss = np.random.SeedSequence(seed, spawn_key=(STREAM_BEST_KNOWN, state.time_index, r))
            rng = np.random.default_rng(ss)
            f, x, viol = _frozen_de(state, landscape, d, lower, upper, rng, per_restart)
            if best is None or is_better(Evaluation(f, viol, state.time_index),
                                         Evaluation(best[0], best[2], state.time_index)):
                best = (f, x, viol)
        assert best is not None
        if best[2] > 1e-9:
            raise RuntimeError(
                f"no feasible best-known solution at t={state.time_index} "
                f"(violation {best[2]:.3g}); raise budget_per_time")
        table.put(state.time_index, best[0], best[1])
    return table
