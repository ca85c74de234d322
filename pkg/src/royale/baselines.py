"""Reference optimizers for sanity comparisons: random search and global-best PSO."""

from __future__ import annotations

import time

import numpy as np

from .core import OptimizerConfig, RunResult, SearchSpace, clamp, uniform_in
from .problems import BenchmarkProblem, evaluate_rows

# constriction-equivalent constants
PSO_INERTIA = 0.729
PSO_COGNITIVE = 1.49445
PSO_SOCIAL = 1.49445


def random_search_run(
    problem: BenchmarkProblem, config: OptimizerConfig, rng, space: SearchSpace | None = None
) -> RunResult:
    """pop_size uniform samples per iteration in the original box."""
    start = time.perf_counter()
    space = SearchSpace.box(*problem.bounds()) if space is None else space
    best_fit, best_pos = np.inf, None
    trace = np.empty(config.max_iter)
    for t in range(config.max_iter):
        xs = uniform_in(space, rng, config.pop_size)
        values = evaluate_rows(problem, xs, rng)
        k = int(np.argmin(values))
        if values[k] < best_fit:
            best_fit, best_pos = float(values[k]), xs[k].copy()
        trace[t] = best_fit
    return RunResult(
        best_fitness=best_fit,
        best_position=best_pos,
        convergence_trace=trace,
        elapsed=time.perf_counter() - start,
        seed=config.seed,
        evaluations=config.pop_size * config.max_iter,
    )


def pso_velocity(velocity, position, pbest, gbest, r_cognitive, r_social, vmax):
    """Inertia-weighted velocity update, clipped to +/- vmax per dimension."""
    v = (
        PSO_INERTIA * velocity
        + PSO_COGNITIVE * r_cognitive * (pbest - position)
        + PSO_SOCIAL * r_social * (gbest - position)
    )
    return np.clip(v, -vmax, vmax)


def pso_run(
    problem: BenchmarkProblem, config: OptimizerConfig, rng, space: SearchSpace | None = None
) -> RunResult:
    """Synchronous global-best PSO, zero initial velocities.

    The initial swarm costs one extra pop_size of evaluations; each
    iteration after that costs exactly pop_size.
    """
    start = time.perf_counter()
    space = SearchSpace.box(*problem.bounds()) if space is None else space
    n, dim = config.pop_size, space.dim
    vmax = space.upper - space.lower

    x = uniform_in(space, rng, n)
    v = np.zeros((n, dim))
    fx = evaluate_rows(problem, x, rng)
    pbest, pbest_fit = x.copy(), fx.copy()
    g = int(np.argmin(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])

    trace = np.empty(config.max_iter)
    for t in range(config.max_iter):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = pso_velocity(v, x, pbest, gbest, r1, r2, vmax)
        x = clamp(x + v, space)
        fx = evaluate_rows(problem, x, rng)
        improved = fx < pbest_fit
        pbest[improved] = x[improved]
        pbest_fit[improved] = fx[improved]
        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
        trace[t] = gbest_fit
    return RunResult(
        best_fitness=gbest_fit,
        best_position=gbest,
        convergence_trace=trace,
        elapsed=time.perf_counter() - start,
        seed=config.seed,
        evaluations=n * (config.max_iter + 1),
    )
