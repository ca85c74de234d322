"""Modified BRO: losers move with a persistent, velocity-like lambda vector."""

from __future__ import annotations

import numpy as np

from .bro import MOVE_MBRO, BroState, run_engine, sweep
from .core import OptimizerConfig
from .problems import BenchmarkProblem


def mbro_move(loser_pos, best_pos, lam, rng) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(new_position, new_lambda)``.

    lambda' = r1 * best + r2 * (lambda - loser) and new = loser + lambda'.
    r1 and r2 are drawn once per move (r1 first) and shared by all
    dimensions. Lambda is never clamped; the caller clamps the position.
    """
    loser_pos = np.asarray(loser_pos, dtype=float)
    r1 = rng.random()
    r2 = rng.random()
    new_lam = r1 * np.asarray(best_pos, dtype=float) + r2 * (np.asarray(lam, dtype=float) - loser_pos)
    return loser_pos + new_lam, new_lam


def mbro_step(state: BroState, problem: BenchmarkProblem, config: OptimizerConfig, rng) -> BroState:
    if state.population.lambdas is None:
        raise ValueError("M-BRO state needs lambda vectors")
    return sweep(state, problem, config, rng, MOVE_MBRO)


def mbro_run(problem: BenchmarkProblem, config: OptimizerConfig, rng, callback=None):
    """Full M-BRO run; lambdas start U[0, 1) and are redrawn on respawn."""
    return run_engine(problem, config, rng, MOVE_MBRO, callback=callback)
