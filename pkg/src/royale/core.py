"""Shared types, random streams and population helpers for the optimizers."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid optimizer, problem or experiment settings."""


class Algorithm(str, enum.Enum):
    BRO = "BRO"
    MBRO = "MBRO"
    PSO = "PSO"
    RANDOM = "RANDOM"

    @classmethod
    def parse(cls, value: "str | Algorithm") -> "Algorithm":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "")
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown algorithm {value!r}") from None


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

MAX_SEED = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """Explicitly seeded PCG64 stream."""
    if not 0 <= int(seed) <= MAX_SEED:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(master_seed: int, *keys: object) -> int:
    """Stable 64-bit seed from a master seed and any number of labels.

    Uses blake2b over the textual keys, so the result does not depend on
    Python's per-process hash randomisation or on which other keys exist.
    """
    payload = "\x1f".join([str(int(master_seed)), *map(str, keys)]).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def spawn_rngs(master_seed: int, n: int) -> list[np.random.Generator]:
    """`n` independent streams for runs 0..n-1 of one batch."""
    return [make_rng(derive_seed(master_seed, run)) for run in range(n)]


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass
class SearchSpace:
    """Current box plus the original box it was shrunk from."""

    lower: np.ndarray
    upper: np.ndarray
    original_lower: np.ndarray
    original_upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).copy()
        self.upper = np.asarray(self.upper, dtype=float).copy()
        self.original_lower = np.asarray(self.original_lower, dtype=float).copy()
        self.original_upper = np.asarray(self.original_upper, dtype=float).copy()
        shapes = {v.shape for v in (self.lower, self.upper, self.original_lower, self.original_upper)}
        if len(shapes) != 1 or self.lower.ndim != 1 or self.lower.size < 1:
            raise ConfigurationError("search space bound vectors must be 1-D with equal, non-zero length")
        if np.any(self.lower > self.upper):
            raise ConfigurationError("search space has lower > upper")
        if np.any(self.original_lower > self.lower) or np.any(self.upper > self.original_upper):
            raise ConfigurationError("current box is not contained in the original box")

    @classmethod
    def box(cls, lower, upper, dim: int | None = None) -> "SearchSpace":
        """Fresh (unshrunk) space; scalar bounds are broadcast to `dim`."""
        if dim is not None:
            lower = np.full(dim, lower, dtype=float) if np.ndim(lower) == 0 else lower
            upper = np.full(dim, upper, dtype=float) if np.ndim(upper) == 0 else upper
        return cls(lower, upper, lower, upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def copy(self) -> "SearchSpace":
        return SearchSpace(self.lower, self.upper, self.original_lower, self.original_upper)


@dataclass
class Individual:
    position: np.ndarray
    fitness: float
    damage: int = 0
    lam: np.ndarray | None = None


class Population(Sequence[Individual]):
    """Struct-of-arrays population.

    Indexing yields :class:`Individual` snapshots; the optimizers work on the
    arrays directly so a nearest-neighbour query is one vector operation.
    """

    def __init__(self, positions, fitness, damage=None, lambdas=None):
        self.positions = np.array(positions, dtype=float, ndmin=2)
        self.fitness = np.array(fitness, dtype=float, ndmin=1)
        n = self.positions.shape[0]
        self.damage = np.zeros(n, dtype=np.int64) if damage is None else np.array(damage, dtype=np.int64)
        self.lambdas = None if lambdas is None else np.array(lambdas, dtype=float, ndmin=2)
        if self.fitness.shape != (n,) or self.damage.shape != (n,):
            raise ConfigurationError("population arrays disagree on size")
        if self.lambdas is not None and self.lambdas.shape != self.positions.shape:
            raise ConfigurationError("lambda array must match the position array")

    @classmethod
    def from_individuals(cls, individuals: Sequence[Individual]) -> "Population":
        lams = [ind.lam for ind in individuals]
        has_lam = all(lam is not None for lam in lams)
        return cls(
            [ind.position for ind in individuals],
            [ind.fitness for ind in individuals],
            [ind.damage for ind in individuals],
            lams if has_lam else None,
        )

    def __len__(self) -> int:
        return self.positions.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        lam = None if self.lambdas is None else self.lambdas[i].copy()
        return Individual(self.positions[i].copy(), float(self.fitness[i]), int(self.damage[i]), lam)

    def copy(self) -> "Population":
        return Population(self.positions, self.fitness, self.damage, self.lambdas)


@dataclass
class OptimizerConfig:
    pop_size: int = 100
    max_iter: int = 500
    damage_threshold: int = 3
    seed: int = 0
    algorithm: Algorithm = Algorithm.MBRO

    def __post_init__(self):
        self.algorithm = Algorithm.parse(self.algorithm)
        if int(self.pop_size) < 2:
            raise ConfigurationError("pop_size must be >= 2 (duels need a neighbour)")
        if int(self.max_iter) < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if int(self.damage_threshold) < 1:
            raise ConfigurationError("damage_threshold must be >= 1")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")


@dataclass
class RunResult:
    best_fitness: float
    best_position: np.ndarray
    convergence_trace: np.ndarray
    elapsed: float
    seed: int
    evaluations: int = 0
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# population utilities
# ---------------------------------------------------------------------------


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _positions_of(population) -> np.ndarray:
    if isinstance(population, Population):
        return population.positions
    if isinstance(population, np.ndarray):
        return population if population.ndim == 2 else population.reshape(len(population), -1)
    return np.array([ind.position if isinstance(ind, Individual) else ind for ind in population], dtype=float, ndmin=2)


@numba.njit(cache=True)
def nearest_index(positions: np.ndarray, i: int) -> int:
    """Unchecked kernel: closest row to row `i`, first index on ties."""
    n, dim = positions.shape
    best, best_dist = -1, np.inf
    for j in range(n):
        if j == i:
            continue
        acc = 0.0
        for k in range(dim):
            diff = positions[j, k] - positions[i, k]
            acc += diff * diff
        dist = np.sqrt(acc)
        if dist < best_dist:
            best, best_dist = j, dist
    return best


def nearest_neighbor(population, i: int) -> int:
    """Index of the closest other member; ties go to the smallest index."""
    positions = _positions_of(population)
    n = positions.shape[0]
    if n < 2:
        raise ValueError("nearest_neighbor needs a population of at least 2")
    if not 0 <= i < n:
        raise IndexError(i)
    return int(nearest_index(np.ascontiguousarray(positions, dtype=float), i))


def clamp(position, space: SearchSpace) -> np.ndarray:
    return np.minimum(np.maximum(position, space.lower), space.upper)


def uniform_in(space: SearchSpace, rng, size: int | None = None) -> np.ndarray:
    """r * (upper - lower) + lower with r ~ U[0, 1) per coordinate."""
    shape = space.dim if size is None else (size, space.dim)
    r = rng.random(shape)
    return r * (space.upper - space.lower) + space.lower


def initialize_population(
    config: OptimizerConfig,
    space: SearchSpace,
    rng,
    objective: Callable[[np.ndarray], float],
    with_lambda: bool | None = None,
) -> Population:
    """Uniform random population with fitness evaluated and damage zeroed.

    `with_lambda` defaults to True for M-BRO; lambdas are U[0, 1) per
    coordinate and are drawn after all positions.
    """
    if with_lambda is None:
        with_lambda = config.algorithm is Algorithm.MBRO
    positions = uniform_in(space, rng, config.pop_size)
    fitness = np.array([objective(p) for p in positions], dtype=float)
    lambdas = rng.random((config.pop_size, space.dim)) if with_lambda else None
    return Population(positions, fitness, None, lambdas)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))
