"""Summary statistics over repeated runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import RunResult


@dataclass(frozen=True)
class AggregateStats:
    mean: float
    std: float
    median: float
    best: float
    worst: float
    mean_elapsed: float
    n_runs: int


def aggregate_values(best_fitness: Iterable[float], elapsed: Iterable[float] | None = None) -> AggregateStats:
    """Statistics of a set of best-fitness values.

    `std` is the sample standard deviation (divisor n - 1), defined as 0 for
    a single run.
    """
    values = np.asarray(list(best_fitness), dtype=float)
    if values.size == 0:
        raise ValueError("cannot aggregate an empty set of runs")
    times = np.zeros(values.size) if elapsed is None else np.asarray(list(elapsed), dtype=float)
    # sort first so the sums do not depend on input order
    ordered = np.sort(values)
    std = float(np.std(ordered, ddof=1)) if values.size > 1 else 0.0
    return AggregateStats(
        mean=float(np.mean(ordered)),
        std=std,
        median=float(np.median(ordered)),
        best=float(ordered[0]),
        worst=float(ordered[-1]),
        mean_elapsed=float(np.mean(np.sort(times))),
        n_runs=int(values.size),
    )


def aggregate(results: Sequence[RunResult]) -> AggregateStats:
    if len(results) == 0:
        raise ValueError("cannot aggregate an empty set of runs")
    return aggregate_values([r.best_fitness for r in results], [r.elapsed for r in results])
