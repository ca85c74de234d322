"""The 19 benchmark objectives (13 scalable, 6 fixed-dimension).

Every formula accepts a single point of shape ``(D,)`` or a batch of shape
``(N, D)`` and reduces over the last axis. Shifted problems evaluate the
formula at ``x - shift``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numba
import numpy as np

from .core import ConfigurationError

SCALABLE_DIM = 30


# ---------------------------------------------------------------------------
# formulas: one point ``z`` of shape (D,), compiled with numba
# ---------------------------------------------------------------------------

jit = numba.njit(cache=True)


@jit
def sphere(z):
    return np.sum(z * z)


@jit
def schwefel_220(z):
    a = np.abs(z)
    return np.sum(a) + np.prod(a)


@jit
def rotated_hyper_ellipsoid(z):
    return np.sum(np.cumsum(z) ** 2)


@jit
def schwefel_221(z):
    return np.max(np.abs(z))


@jit
def rosenbrock(z):
    head, tail = z[:-1], z[1:]
    return np.sum(100.0 * (tail - head**2) ** 2 + (head - 1.0) ** 2)


@jit
def step(z):
    return np.sum(np.floor(z + 0.5) ** 2)


@jit
def quartic(z):
    """Deterministic part only; the evaluator adds the U[0, 1) noise."""
    return np.sum(np.arange(1, z.size + 1) * z**4)


@jit
def schwefel(z):
    # as printed: minimised, so large negative values are good
    return np.sum(z * np.sin(np.sqrt(np.abs(z))))


@jit
def rastrigin(z):
    return 10.0 * z.size + np.sum(z**2 - 10.0 * np.cos(2.0 * np.pi * z))


@jit
def ackley(z):
    n = z.size
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z**2) / n))
    b = np.exp(np.sum(np.cos(2.0 * np.pi * z)) / n)
    return a - b + 20.0 + np.e


@jit
def griewank(z):
    i = np.sqrt(np.arange(1, z.size + 1))
    return 1.0 + np.sum(z**2) / 4000.0 - np.prod(np.cos(z / i))


@jit
def _u(z, a, k, m):
    out = 0.0
    for v in z:
        if v > a:
            out += k * (v - a) ** m
        elif v < -a:
            out += k * (-v - a) ** m
    return out


@jit
def penalized_1(z):
    n = z.size
    y = 1.0 + (z + 1.0) / 4.0
    inner = (
        10.0 * np.sin(np.pi * y[0]) ** 2
        + np.sum((y[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * y[1:]) ** 2))
        + (y[-1] - 1.0) ** 2
    )
    return np.pi / n * inner + _u(z, 10.0, 100.0, 4)


@jit
def penalized_2(z):
    inner = (
        np.sin(3.0 * np.pi * z[0]) ** 2
        + np.sum((z[:-1] - 1.0) ** 2 * (1.0 + np.sin(3.0 * np.pi * z[1:]) ** 2))
        + (z[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * z[-1]) ** 2)
    )
    return 0.1 * inner + _u(z, 5.0, 100.0, 4)


_FOXHOLE_GRID = np.array([-32.0, -16.0, 0.0, 16.0, 32.0])
FOXHOLES_A = np.vstack((np.tile(_FOXHOLE_GRID, 5), np.repeat(_FOXHOLE_GRID, 5)))  # (2, 25)


@jit
def shekel_foxholes(z):
    acc = 1.0 / 500.0
    for j in range(25):
        acc += 1.0 / (j + 1 + (z[0] - FOXHOLES_A[0, j]) ** 6 + (z[1] - FOXHOLES_A[1, j]) ** 6)
    return 1.0 / acc


KOWALIK_A = np.array([0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627, 0.0456, 0.0342, 0.0323, 0.0235, 0.0246])
KOWALIK_B = 1.0 / np.array([0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0])


@jit
def kowalik(z):
    b = KOWALIK_B
    model = z[0] * (b**2 + b * z[1]) / (b**2 + b * z[2] + z[3])
    return np.sum((KOWALIK_A - model) ** 2)


@jit
def six_hump_camel(z):
    x1, x2 = z[0], z[1]
    return 4 * x1**2 - 2.1 * x1**4 + x1**6 / 3 + x1 * x2 - 4 * x2**2 + 4 * x2**4


@jit
def branin(z):
    x1, x2 = z[0], z[1]
    return (x2 - 5.1 / (4 * np.pi**2) * x1**2 + 5 / np.pi * x1 - 6) ** 2 + 10 * (1 - 1 / (8 * np.pi)) * np.cos(x1) + 10


@jit
def goldstein_price(z):
    x1, x2 = z[0], z[1]
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2)
    return a * b


HARTMANN3_C = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN3_A = np.array([[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]])
HARTMANN3_P = np.array(
    [
        [0.3689, 0.1170, 0.2673],
        [0.4699, 0.4387, 0.7470],
        [0.1091, 0.8732, 0.5547],
        [0.03815, 0.5743, 0.8828],
    ]
)


@jit
def hartmann_3(z):
    out = 0.0
    for i in range(4):
        sq = 0.0
        for j in range(3):
            sq += HARTMANN3_A[i, j] * (z[j] - HARTMANN3_P[i, j]) ** 2
        out -= HARTMANN3_C[i] * np.exp(-sq)
    return out


@jit
def formula(number, z):
    """Dispatch on the function number (1..19)."""
    if number == 1:
        return sphere(z)
    if number == 2:
        return schwefel_220(z)
    if number == 3:
        return rotated_hyper_ellipsoid(z)
    if number == 4:
        return schwefel_221(z)
    if number == 5:
        return rosenbrock(z)
    if number == 6:
        return step(z)
    if number == 7:
        return quartic(z)
    if number == 8:
        return schwefel(z)
    if number == 9:
        return rastrigin(z)
    if number == 10:
        return ackley(z)
    if number == 11:
        return griewank(z)
    if number == 12:
        return penalized_1(z)
    if number == 13:
        return penalized_2(z)
    if number == 14:
        return shekel_foxholes(z)
    if number == 15:
        return kowalik(z)
    if number == 16:
        return six_hump_camel(z)
    if number == 17:
        return branin(z)
    if number == 18:
        return goldstein_price(z)
    if number == 19:
        return hartmann_3(z)
    return np.nan


@jit
def formula_rows(number, xs, shift):
    out = np.empty(xs.shape[0])
    for k in range(xs.shape[0]):
        out[k] = formula(number, xs[k] - shift)
    return out


# ---------------------------------------------------------------------------
# problem records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkProblem:
    id: str
    name: str
    dimension: int
    lower: float
    upper: float
    func: Callable = None
    shift: np.ndarray | None = None
    known_best: float | None = None
    # optimum of the unshifted formula; shifted into place by known_best_position
    optimum_z: np.ndarray | None = None
    noisy: bool = False
    printed_shifts: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigurationError(f"{self.id}: lower must be < upper")
        if self.shift is not None and np.shape(self.shift) != (self.dimension,):
            raise ConfigurationError(f"{self.id}: shift length must equal dimension")

    @property
    def number(self) -> int:
        return int(self.id[1:])

    @property
    def scalable(self) -> bool:
        return self.number <= 13

    @property
    def known_best_position(self) -> np.ndarray | None:
        if self.optimum_z is None:
            return None
        if self.shift is None:
            return self.optimum_z.copy()
        return self.optimum_z + self.shift

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.full(self.dimension, self.lower), np.full(self.dimension, self.upper)

    @property
    def offset(self) -> np.ndarray:
        """The shift, or zeros when unshifted (``x - 0.0 == x`` exactly)."""
        return np.zeros(self.dimension) if self.shift is None else self.shift

    def raw(self, x) -> np.ndarray | float:
        """Formula value at `x` after shifting, without noise or checks."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return formula(self.number, x - self.offset)
        return formula_rows(self.number, np.ascontiguousarray(x.reshape(-1, self.dimension)), self.offset).reshape(
            x.shape[:-1]
        )

    def with_dimension(self, dimension: int) -> "BenchmarkProblem":
        if not self.scalable:
            raise ConfigurationError(f"{self.id} has fixed dimension {self.dimension}")
        return _build(self.number, dimension, printed_shifts=self.printed_shifts)

    def without_shift(self) -> "BenchmarkProblem":
        return replace(self, shift=None)

    def __call__(self, x, rng=None):
        return evaluate(self, x, rng)


def evaluate(problem: BenchmarkProblem, x, rng=None):
    """Objective value at `x` (one point or a batch of rows).

    f7 adds U[0, 1) noise drawn from `rng`, which is then required.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (problem.dimension,):
        raise ValueError(f"{problem.id} expects dimension {problem.dimension}, got shape {x.shape}")
    if np.isnan(x).any():
        raise ValueError(f"{problem.id}: NaN in input")
    value = problem.raw(x)
    if problem.noisy:
        if rng is None:
            raise ValueError(f"{problem.id} is noisy and needs a random stream")
        value = value + rng.random(np.shape(value))
    return float(value) if np.ndim(value) == 0 else value


def make_objective(problem: BenchmarkProblem, rng=None) -> Callable[[np.ndarray], float]:
    """Unchecked single-point objective (noise drawn from `rng` for f7)."""
    number, offset = problem.number, problem.offset
    if problem.noisy:
        if rng is None:
            raise ValueError(f"{problem.id} is noisy and needs a random stream")
        return lambda x: formula(number, x - offset) + rng.random()
    return lambda x: formula(number, x - offset)


def evaluate_rows(problem: BenchmarkProblem, xs: np.ndarray, rng=None) -> np.ndarray:
    """Unchecked batch evaluation; one noise draw per row for f7."""
    values = formula_rows(problem.number, np.ascontiguousarray(xs, dtype=float), problem.offset)
    if problem.noisy:
        if rng is None:
            raise ValueError(f"{problem.id} is noisy and needs a random stream")
        values += rng.random(values.shape[0])
    return values


# canonical optima of the fixed-dimension formulas, refined numerically and frozen
_F14_OPT = np.array([-31.97833447228534, -31.97834078747712])
_F15_OPT = np.array([0.19283345304274813, 0.19083624027597035, 0.12311729907598003, 0.13576599033984466])
_F16_OPT = np.array([0.08984201652927098, -0.7126564013807202])
_F17_OPT = np.array([np.pi, 2.275])
_F18_OPT = np.array([0.0, -1.0])
_F19_OPT = np.array([0.11461434203082951, 0.5556488507905384, 0.8525469538460251])

# id: (name, formula, lower, upper, printed shift value, fixed dim, known best, optimum in z)
_TABLE = {
    1: ("Sphere", sphere, -100.0, 100.0, -30.0, None, 0.0, 0.0),
    2: ("Schwefel 2.20", schwefel_220, -10.0, 10.0, -3.0, None, 0.0, 0.0),
    3: ("Rotated hyper-ellipsoids", rotated_hyper_ellipsoid, -100.0, 100.0, -30.0, None, 0.0, 0.0),
    4: ("Schwefel 2.21", schwefel_221, -100.0, 100.0, -30.0, None, 0.0, 0.0),
    5: ("Rosenbrock", rosenbrock, -30.0, 30.0, -15.0, None, 0.0, 1.0),
    6: ("Step", step, -100.0, 100.0, None, None, 0.0, 0.0),
    7: ("Quartic", quartic, -128.0, 128.0, -25.0, None, 0.0, 0.0),
    8: ("Schwefel", schwefel, -500.0, 500.0, -300.0, None, None, None),
    9: ("Rastrigin", rastrigin, -5.12, 5.12, -2.0, None, 0.0, 0.0),
    10: ("Ackley", ackley, -32.0, 32.0, None, None, 0.0, 0.0),
    11: ("Griewank", griewank, -600.0, 600.0, -400.0, None, 0.0, 0.0),
    12: ("Penalized", penalized_1, -50.0, 50.0, -30.0, None, 0.0, -1.0),
    13: ("Levi", penalized_2, -50.0, 50.0, None, None, 0.0, 1.0),
    14: ("Shekel's foxholes", shekel_foxholes, -65.0, 65.0, None, 2, None, _F14_OPT),
    15: ("Kowalik", kowalik, -5.0, 5.0, None, 4, None, _F15_OPT),
    16: ("Six-hump camel back", six_hump_camel, -5.0, 5.0, None, 2, None, _F16_OPT),
    17: ("Branin", branin, -5.0, 5.0, None, 2, None, _F17_OPT),
    18: ("Goldstein-Price", goldstein_price, -2.0, 2.0, None, 2, 3.0, _F18_OPT),
    # printed range is [1, 3] while the canonical optimum sits in [0, 1]^3;
    # a unit shift keeps the printed range and makes the optimum reachable
    19: ("Hartmann 3", hartmann_3, 1.0, 3.0, 1.0, 3, None, _F19_OPT),
}

# out-of-range shifts from the printed tables, opt-in only
PRINTED_SHIFTS = {6: -750.0, 13: (-100.0, 100.0)}


def _printed_shift(number: int, dimension: int) -> np.ndarray:
    value = PRINTED_SHIFTS[number]
    if np.ndim(value) == 0:
        return np.full(dimension, float(value))
    return np.resize(np.asarray(value, dtype=float), dimension)


def _build(number: int, dimension: int | None = None, printed_shifts: bool = False) -> BenchmarkProblem:
    if number not in _TABLE:
        raise ConfigurationError(f"unknown benchmark function f{number}")
    name, func, lo, hi, shift_value, fixed_dim, known, opt = _TABLE[number]
    if fixed_dim is not None:
        if dimension is not None and dimension != fixed_dim:
            raise ConfigurationError(f"f{number} has fixed dimension {fixed_dim}")
        dim = fixed_dim
    else:
        dim = SCALABLE_DIM if dimension is None else int(dimension)
        if dim < 2:
            raise ConfigurationError("scalable functions need dimension >= 2")
    if printed_shifts and number in PRINTED_SHIFTS:
        shift = _printed_shift(number, dim)
    else:
        shift = None if shift_value is None else np.full(dim, float(shift_value))
    optimum_z = None if opt is None else np.broadcast_to(np.asarray(opt, dtype=float), (dim,)).copy()
    if known is None and optimum_z is not None:
        known = float(func(optimum_z))
    return BenchmarkProblem(
        id=f"f{number}",
        name=name,
        dimension=dim,
        lower=lo,
        upper=hi,
        func=func,
        shift=shift,
        known_best=known,
        optimum_z=optimum_z,
        noisy=number == 7,
        printed_shifts=printed_shifts,
    )


def parse_id(ref) -> int:
    text = str(ref).strip().lower()
    if text.startswith("f"):
        text = text[1:]
    try:
        number = int(text)
    except ValueError:
        raise ConfigurationError(f"unknown benchmark function {ref!r}") from None
    if number not in _TABLE:
        raise ConfigurationError(f"unknown benchmark function {ref!r}")
    return number


def get_problem(ref, dimension: int | None = None, printed_shifts: bool = False) -> BenchmarkProblem:
    """Problem by id (``"f9"``, ``9``)."""
    return _build(parse_id(ref), dimension, printed_shifts)


def catalog(dimension: int | None = None, printed_shifts: bool = False) -> list[BenchmarkProblem]:
    """All 19 problems in id order.

    `dimension` overrides the default 30 for f1-f13 only. `printed_shifts`
    restores the out-of-range shifts printed for f6 and f13.
    """
    return [_build(n, dimension if n <= 13 else None, printed_shifts) for n in sorted(_TABLE)]
