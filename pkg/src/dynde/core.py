"""Shared building blocks: candidate solutions, feasibility rules, bounds
handling and reproducible random streams.

Positions are plain 1-d float64 numpy arrays. An :class:`Individual` couples a
position with the :class:`Evaluation` it received, and a population is just a
list of individuals whose order is meaningful (sentinel slots for change
detection are addressed by index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream ids used to split one run seed into independent generators. Keeping
# the consumers apart means toggling one mechanism (say, the predictor) never
# shifts the draws of another.
STREAM_DE = 0
STREAM_ENV = 1
STREAM_DIVERSITY = 2
STREAM_PREDICTOR = 3
STREAM_BEST_KNOWN = 4


@dataclass(frozen=True)
class RngStream:
    """Addressable source of randomness: (seed, stream_id) -> generator.

    Two streams with the same seed and stream id produce bitwise identical
    sequences on every platform; different stream ids under the same seed are
    statistically independent.
    """

    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)


def make_rng(seed: int, stream_id: int) -> np.random.Generator:
    """Shorthand for ``RngStream(seed, stream_id).generator()``."""
    return RngStream(seed, stream_id).generator()


@dataclass(frozen=True)
class Evaluation:
    """Outcome of evaluating a position at one environment state.

    ``constraint_value`` keeps the signed slack of the linear constraint
    (negative when the point sits strictly inside the feasible region).
    Selection only ever looks at ``violation``; the raw value exists so
    change detection can notice a moved constraint boundary even when the
    clamped violation stays zero on both sides of the move.
    """

    objective: float
    violation: float
    time_index: int
    constraint_value: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0


@dataclass
class Individual:
    x: np.ndarray
    ev: Evaluation | None = None


# Ordered population; index identity matters (sentinels, in-place replacement).
Population = list[Individual]


def aggregate_violation(g_values: np.ndarray) -> float:
    """Total constraint violation: sum of the positive parts of g_i(x).

    Zero exactly when every constraint is satisfied; negative slack does not
    offset a violation elsewhere.
    """
    g = np.asarray(g_values, dtype=float)
    return float(np.sum(np.maximum(g, 0.0)))


def compare_feasibility(a: Evaluation, b: Evaluation) -> int:
    """Three-way comparison under feasibility rules.

    Returns 1 if ``a`` is strictly better, -1 if ``b`` is, 0 on a tie.
    A feasible solution beats any infeasible one; two feasible solutions
    compare by objective, two infeasible ones by total violation.
    """
    a_feas = a.violation == 0.0
    b_feas = b.violation == 0.0
    if a_feas and not b_feas:
        return 1
    if b_feas and not a_feas:
        return -1
    if a_feas:
        if a.objective < b.objective:
            return 1
        if a.objective > b.objective:
            return -1
        return 0
    if a.violation < b.violation:
        return 1
    if a.violation > b.violation:
        return -1
    return 0


def is_better(a: Evaluation, b: Evaluation) -> bool:
    """True when ``a`` strictly beats ``b`` under the feasibility rules."""
    return compare_feasibility(a, b) > 0


def feasibility_key(ev: Evaluation) -> tuple[int, float]:
    """Sort key equivalent to :func:`compare_feasibility`, best first.

    Sorting ascending by this key orders feasible individuals by objective
    ahead of infeasible ones ordered by violation.
    """
    if ev.violation == 0.0:
        return (0, ev.objective)
    return (1, ev.violation)


def rank_worst_first(pop: Population) -> list[int]:
    """Indices of evaluated members ordered worst to best.

    Members without an evaluation are placed ahead of (worse than) every
    evaluated one. Ties keep index order.
    """
    def key(i: int) -> tuple[int, float]:
        ev = pop[i].ev
        if ev is None:
            return (2, 0.0)
        return feasibility_key(ev)

    return sorted(range(len(pop)), key=key, reverse=True)


def clamp_to_bounds(x: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """Project a position onto the box [lower, upper]^d, coordinate-wise."""
    return np.clip(x, lower, upper)
