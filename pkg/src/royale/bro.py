"""Battle Royale Optimizer engine.

Each sweep visits individuals in index order. Individual ``i`` duels its
nearest neighbour; the loser takes one point of damage and either moves
toward the best-ever solution or, once its damage reaches the threshold, is
respawned uniformly inside the current box. On a growing schedule of
iterations the box shrinks to ``best +/- per-dimension population SD``.

The duel sweep is compiled with numba. It performs exactly the arithmetic of
the public helpers (:func:`bro_move`, :func:`royale.mbro.mbro_move`,
:func:`royale.core.nearest_neighbor`) and draws from the caller's generator
in the same order, so a plain-Python sweep built from those helpers
reproduces it bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .core import (
    ConfigurationError,
    Individual,
    OptimizerConfig,
    Population,
    RunResult,
    SearchSpace,
    clamp,
    initialize_population,
    nearest_index,
    round_half_away,
)
from .problems import BenchmarkProblem, formula, make_objective

MOVE_BRO = 0
MOVE_MBRO = 1


def initial_delta(max_iter: int) -> int:
    """First shrink iteration: round(max_iter / log10(max_iter))."""
    if max_iter < 2:
        raise ConfigurationError("max_iter must be >= 2 to schedule shrinking")
    return round_half_away(max_iter / math.log10(max_iter))


def next_delta(delta: int) -> int:
    return delta + round_half_away(delta / 2)


def delta_schedule(max_iter: int) -> list[int]:
    """Every shrink iteration that falls within `max_iter` sweeps."""
    if max_iter < 2:
        return []
    out, d = [], initial_delta(max_iter)
    while d <= max_iter:
        out.append(d)
        d = next_delta(d)
    return out


def bro_move(loser_pos, best_pos, rng) -> np.ndarray:
    """loser + r * (best - loser), one r per dimension. Caller clamps."""
    loser_pos = np.asarray(loser_pos, dtype=float)
    r = rng.random(loser_pos.shape)
    return loser_pos + r * (np.asarray(best_pos, dtype=float) - loser_pos)


def shrink_space(population, best: Individual, space: SearchSpace) -> SearchSpace:
    """Box of best +/- population SD (divisor N), cut back to the original box."""
    if isinstance(population, Population):
        positions = population.positions
    else:
        positions = np.array([ind.position for ind in population], dtype=float, ndmin=2)
    if positions.shape[0] == 0:
        raise ValueError("cannot shrink around an empty population")
    sd = positions.std(axis=0)
    centre = np.asarray(best.position, dtype=float)
    lower = np.clip(centre - sd, space.original_lower, space.original_upper)
    upper = np.clip(centre + sd, space.original_lower, space.original_upper)
    return SearchSpace(lower, upper, space.original_lower, space.original_upper)


@dataclass
class BroState:
    population: Population
    space: SearchSpace
    best: Individual
    iteration: int = 0
    delta: int = 0
    shrink_count: int = 0
    evaluations: int = 0


def init_state(problem: BenchmarkProblem, config: OptimizerConfig, rng, with_lambda: bool = False) -> BroState:
    space = SearchSpace.box(*problem.bounds())
    objective = make_objective(problem, rng)
    pop = initialize_population(config, space, rng, objective, with_lambda=with_lambda)
    k = int(np.argmin(pop.fitness))
    # with a single iteration the schedule never fires
    delta = initial_delta(config.max_iter) if config.max_iter >= 2 else config.max_iter + 1
    return BroState(pop, space, pop[k], 0, delta, 0, config.pop_size)


@numba.njit(cache=True)
def _duel_sweep(pos, fit, dmg, lam, move, best_pos, best_fit, lower, upper, number, offset, noisy, threshold, rng):
    n, dim = pos.shape
    for i in range(n):
        j = nearest_index(pos, i)
        # ties go to the smaller index
        if fit[i] < fit[j] or (fit[i] == fit[j] and i < j):
            winner, loser = i, j
        else:
            winner, loser = j, i
        dmg[winner] = 0
        dmg[loser] += 1
        if dmg[loser] >= threshold:
            for d in range(dim):
                pos[loser, d] = rng.random() * (upper[d] - lower[d]) + lower[d]
            if move == MOVE_MBRO:
                for d in range(dim):
                    lam[loser, d] = rng.random()
            dmg[loser] = 0
        else:
            if move == MOVE_MBRO:
                r1 = rng.random()
                r2 = rng.random()
                for d in range(dim):
                    step = r1 * best_pos[d] + r2 * (lam[loser, d] - pos[loser, d])
                    lam[loser, d] = step
                    pos[loser, d] = pos[loser, d] + step
            else:
                for d in range(dim):
                    r = rng.random()
                    pos[loser, d] = pos[loser, d] + r * (best_pos[d] - pos[loser, d])
            for d in range(dim):
                pos[loser, d] = min(max(pos[loser, d], lower[d]), upper[d])
        value = formula(number, pos[loser] - offset)
        if noisy:
            value += rng.random()
        fit[loser] = value
        if value < best_fit[0]:
            best_fit[0] = value
            best_pos[:] = pos[loser]
    return n


def sweep(state: BroState, problem: BenchmarkProblem, config: OptimizerConfig, rng, move: int) -> BroState:
    """One iteration of duels, then the scheduled shrink if due (in place)."""
    pop, space = state.population, state.space
    best_pos = np.array(state.best.position, dtype=float)
    best_fit = np.array([state.best.fitness])
    lam = pop.lambdas if pop.lambdas is not None else np.empty((0, 0))
    state.evaluations += _duel_sweep(
        pop.positions,
        pop.fitness,
        pop.damage,
        lam,
        move,
        best_pos,
        best_fit,
        space.lower,
        space.upper,
        problem.number,
        problem.offset,
        problem.noisy,
        config.damage_threshold,
        rng,
    )
    state.best = Individual(best_pos, float(best_fit[0]))

    if state.iteration + 1 >= state.delta:
        _shrink_in_place(state, problem, rng)
    state.iteration += 1
    return state


def _shrink_in_place(state: BroState, problem: BenchmarkProblem, rng) -> None:
    pop = state.population
    state.space = space = shrink_space(pop, state.best, state.space)
    objective = make_objective(problem, rng)
    outside = np.any((pop.positions < space.lower) | (pop.positions > space.upper), axis=1)
    for k in np.flatnonzero(outside):
        pop.positions[k] = clamp(pop.positions[k], space)
        pop.fitness[k] = objective(pop.positions[k])
        state.evaluations += 1
        if pop.fitness[k] < state.best.fitness:
            state.best = pop[k]
    state.delta = next_delta(state.delta)
    state.shrink_count += 1


def bro_step(state: BroState, problem: BenchmarkProblem, config: OptimizerConfig, rng) -> BroState:
    """Advance `state` by one iteration (in place) and return it."""
    return sweep(state, problem, config, rng, MOVE_BRO)


def run_engine(
    problem: BenchmarkProblem,
    config: OptimizerConfig,
    rng,
    move: int,
    callback: Callable[[BroState], None] | None = None,
) -> RunResult:
    start = time.perf_counter()
    state = init_state(problem, config, rng, with_lambda=move == MOVE_MBRO)
    trace = np.empty(config.max_iter)
    for t in range(config.max_iter):
        sweep(state, problem, config, rng, move)
        trace[t] = state.best.fitness
        if callback is not None:
            callback(state)
    return RunResult(
        best_fitness=float(state.best.fitness),
        best_position=state.best.position.copy(),
        convergence_trace=trace,
        elapsed=time.perf_counter() - start,
        seed=config.seed,
        evaluations=state.evaluations,
        extra={"shrinks": state.shrink_count},
    )


def bro_run(problem: BenchmarkProblem, config: OptimizerConfig, rng, callback=None) -> RunResult:
    """Full BRO run; `callback(state)` is invoked after every iteration."""
    return run_engine(problem, config, rng, MOVE_BRO, callback=callback)
