"""Batch experiment driver: specs, repeated runs, CSV output and verification.

Output layout of ``run``::

    <out>/runs.csv        one row per run
    <out>/aggregate.csv   one row per (algorithm, function)
    <out>/traces/         <ALGO>_<fid>_run<NNN>.csv, only with emit_traces

Floats are written with ``repr`` (shortest round-trip form), so re-reading a
file recovers the exact doubles and identical specs give identical files,
apart from the elapsed-time columns.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import pso_run, random_search_run
from .bro import bro_run
from .core import MAX_SEED, Algorithm, ConfigurationError, OptimizerConfig, RunResult, derive_seed, make_rng
from .mbro import mbro_run
from .problems import BenchmarkProblem, catalog, get_problem, parse_id
from .stats import AggregateStats, aggregate, aggregate_values

log = logging.getLogger(__name__)

RUN_COLUMNS = ["algorithm", "function", "dimension", "run_index", "seed", "best_fitness", "elapsed_seconds"]
AGGREGATE_COLUMNS = [
    "algorithm",
    "function",
    "dimension",
    "n_runs",
    "mean",
    "std",
    "median",
    "best",
    "worst",
    "mean_elapsed_seconds",
]
TRACE_COLUMNS = ["iteration", "best_so_far"]
CATALOG_COLUMNS = ["id", "name", "dimension", "lower", "upper", "shift", "known_best"]

SHIFT_MODES = ("catalog", "none", "printed")

RUNNERS = {
    Algorithm.BRO: bro_run,
    Algorithm.MBRO: mbro_run,
    Algorithm.PSO: pso_run,
    Algorithm.RANDOM: random_search_run,
}


def run_algorithm(problem: BenchmarkProblem, config: OptimizerConfig, rng=None) -> RunResult:
    """Run ``config.algorithm`` once; the stream defaults to one seeded by ``config.seed``."""
    rng = make_rng(config.seed) if rng is None else rng
    return RUNNERS[config.algorithm](problem, config, rng)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


# ---------------------------------------------------------------------------
# experiment spec
# ---------------------------------------------------------------------------


@dataclass
class ExperimentSpec:
    algorithms: tuple = (Algorithm.BRO, Algorithm.MBRO)
    functions: tuple = tuple(range(1, 20))
    dimension_override: int | None = None
    runs: int = 25
    pop_size: int = 100
    max_iter: int = 500
    damage_threshold: int = 3
    master_seed: int = 0
    output_path: str = "results"
    emit_traces: bool = False
    # "catalog": shifts as catalogued; "none": f1-f13 shifts removed;
    # "printed": catalogue plus the out-of-range printed shifts of f6 and f13
    shift_mode: str = "catalog"
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def bad(name, msg):
            raise ConfigurationError(f"{name}: {msg}")

        try:
            algos = {Algorithm.parse(a) for a in _as_list(self.algorithms)}
        except ConfigurationError as exc:
            bad("algorithms", exc)
        if not algos:
            bad("algorithms", "at least one algorithm is required")
        self.algorithms = tuple(a for a in Algorithm if a in algos)

        try:
            numbers = set()
            for item in _as_list(self.functions):
                numbers.update(_expand_functions(item))
        except ConfigurationError as exc:
            bad("functions", exc)
        if not numbers:
            bad("functions", "at least one function is required")
        self.functions = tuple(sorted(numbers))

        for name in ("runs", "pop_size", "max_iter", "damage_threshold", "jobs"):
            value = _as_int(name, getattr(self, name))
            if value < 1:
                bad(name, "must be a positive integer")
            setattr(self, name, value)
        if self.pop_size < 2:
            bad("pop_size", "must be >= 2")
        self.master_seed = _as_int("master_seed", self.master_seed)
        if not 0 <= self.master_seed <= MAX_SEED:
            bad("master_seed", "must be a 64-bit unsigned integer")
        if self.dimension_override is not None:
            self.dimension_override = _as_int("dimension_override", self.dimension_override)
            if self.dimension_override < 2:
                bad("dimension_override", "must be >= 2")
            fixed = [f"f{n}" for n in self.functions if n > 13]
            if fixed:
                bad("dimension_override", f"fixed-dimension functions cannot be resized: {', '.join(fixed)}")
        if self.shift_mode not in SHIFT_MODES:
            bad("shift_mode", f"expected one of {', '.join(SHIFT_MODES)}")
        self.emit_traces = _as_bool("emit_traces", self.emit_traces)
        self.output_path = str(self.output_path)

    def problem(self, number: int) -> BenchmarkProblem:
        dim = self.dimension_override if number <= 13 else None
        problem = get_problem(number, dim, printed_shifts=self.shift_mode == "printed")
        # f19's offset only moves its optimum into the printed range, so it stays
        return problem.without_shift() if self.shift_mode == "none" and problem.scalable else problem

    def config(self, algorithm: Algorithm, seed: int) -> OptimizerConfig:
        return OptimizerConfig(self.pop_size, self.max_iter, self.damage_threshold, seed, algorithm)

    def run_seed(self, algorithm: Algorithm, number: int, run_index: int) -> int:
        return derive_seed(self.master_seed, algorithm.value, f"f{number}", run_index)

    def describe(self) -> str:
        d = asdict(self)
        d["algorithms"] = ",".join(a.value for a in self.algorithms)
        d["functions"] = ",".join(f"f{n}" for n in self.functions)
        return "".join(f"{k} = {'' if v is None else v}\n" for k, v in d.items() if k not in ("output_path", "jobs"))


def _as_list(value):
    if isinstance(value, (str, int, Algorithm)):
        value = [value]
    out = []
    for item in value:
        if isinstance(item, str):
            out.extend(p.strip() for p in item.split(",") if p.strip())
        else:
            out.append(item)
    return out


def _expand_functions(item) -> list[int]:
    text = str(item).strip().lower()
    if text == "all":
        return list(range(1, 20))
    m = re.fullmatch(r"f?(\d+)\s*(?:-|\.\.)\s*f?(\d+)", text)
    if m:
        lo, hi = parse_id(m.group(1)), parse_id(m.group(2))
        return list(range(lo, hi + 1))
    return [parse_id(text)]


def _as_int(name, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name}: expected an integer, got {value!r}") from None


def _as_bool(name, value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"{name}: expected a boolean, got {value!r}")


_KEY_ALIASES = {
    "algo": "algorithms",
    "algorithm": "algorithms",
    "fn": "functions",
    "function": "functions",
    "dimension": "dimension_override",
    "dim": "dimension_override",
    "pop": "pop_size",
    "iters": "max_iter",
    "seed": "master_seed",
    "out": "output_path",
    "output": "output_path",
    "traces": "emit_traces",
    "shifts": "shift_mode",
    "threshold": "damage_threshold",
}


def read_spec_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"spec: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise ConfigurationError(f"spec: line {lineno} is not 'key = value'")
        key = key.strip().lower().replace("-", "_")
        key = _KEY_ALIASES.get(key, key)
        if key not in ExperimentSpec.__dataclass_fields__:
            raise ConfigurationError(f"spec: unknown key {key!r} on line {lineno}")
        values[key] = value.strip()
    return values


def build_spec(file_values: dict | None = None, **overrides) -> ExperimentSpec:
    """Spec from file values with non-None overrides on top."""
    values = dict(file_values or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    if values.get("dimension_override") in ("", "none", "None"):
        values["dimension_override"] = None
    return ExperimentSpec(**values)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Task:
    algorithm: Algorithm
    number: int
    run_index: int
    seed: int


@dataclass
class PairSummary:
    algorithm: Algorithm
    function: str
    dimension: int
    stats: AggregateStats


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    output_dir: Path
    pairs: list[PairSummary] = field(default_factory=list)

    def lookup(self, algorithm, function) -> AggregateStats:
        algorithm = Algorithm.parse(algorithm)
        fid = f"f{parse_id(function)}"
        for p in self.pairs:
            if p.algorithm is algorithm and p.function == fid:
                return p.stats
        raise KeyError((algorithm, fid))

    def table(self) -> str:
        lines = [f"{'algo':<7}{'fn':<5}{'dim':>4}{'mean':>14}{'std':>12}{'median':>14}{'best':>14}{'time[s]':>9}"]
        for p in self.pairs:
            s = p.stats
            lines.append(
                f"{p.algorithm.value:<7}{p.function:<5}{p.dimension:>4}{s.mean:>14.6g}{s.std:>12.4g}"
                f"{s.median:>14.6g}{s.best:>14.6g}{s.mean_elapsed:>9.3f}"
            )
        return "\n".join(lines)


def _execute(spec: ExperimentSpec, task: _Task) -> RunResult:
    problem = spec.problem(task.number)
    return run_algorithm(problem, spec.config(task.algorithm, task.seed), make_rng(task.seed))


def _execute_packed(args):
    return _execute(*args)


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run every (algorithm, function) batch and write the result files."""
    out = Path(spec.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if spec.emit_traces:
            (out / "traces").mkdir(exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output_path: cannot write to {out}: {exc.strerror}") from None

    tasks = [
        _Task(a, n, k, spec.run_seed(a, n, k))
        for a in spec.algorithms
        for n in spec.functions
        for k in range(spec.runs)
    ]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            # map preserves task order, whatever the completion order
            results = list(pool.map(_execute_packed, [(spec, t) for t in tasks], chunksize=1))
    else:
        results = []
        for t in tasks:
            results.append(_execute(spec, t))
            log.debug("%s f%d run %d: %r", t.algorithm.value, t.number, t.run_index, results[-1].best_fitness)

    report = ExperimentReport(spec, out)
    run_rows, agg_rows = [], []
    for start in range(0, len(tasks), spec.runs):
        batch_tasks = tasks[start : start + spec.runs]
        batch = results[start : start + spec.runs]
        head = batch_tasks[0]
        dim = spec.problem(head.number).dimension
        fid = f"f{head.number}"
        for t, r in zip(batch_tasks, batch):
            run_rows.append([t.algorithm.value, fid, dim, t.run_index, t.seed, r.best_fitness, r.elapsed])
            if spec.emit_traces:
                write_trace(out / "traces" / trace_name(t.algorithm, fid, t.run_index), r.convergence_trace)
        stats = aggregate(batch)
        report.pairs.append(PairSummary(head.algorithm, fid, dim, stats))
        agg_rows.append(
            [head.algorithm.value, fid, dim, stats.n_runs, stats.mean, stats.std, stats.median, stats.best, stats.worst, stats.mean_elapsed]
        )
    write_csv(out / "runs.csv", RUN_COLUMNS, run_rows)
    write_csv(out / "aggregate.csv", AGGREGATE_COLUMNS, agg_rows)
    (out / "spec.txt").write_text(spec.describe())
    return report


def trace_name(algorithm: Algorithm, fid: str, run_index: int) -> str:
    return f"{algorithm.value}_{fid}_run{run_index:03d}.csv"


def write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def write_trace(path: Path, trace) -> None:
    write_csv(path, TRACE_COLUMNS, [(t + 1, float(v)) for t, v in enumerate(trace)])


def read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


# ---------------------------------------------------------------------------
# catalog and verification
# ---------------------------------------------------------------------------


def catalog_rows(problems=None) -> list[list]:
    rows = []
    for p in catalog() if problems is None else problems:
        shift = "" if p.shift is None else ";".join(fmt(float(v)) for v in p.shift)
        rows.append([p.id, p.name, p.dimension, p.lower, p.upper, shift, p.known_best])
    return rows


def emit_catalog(path) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, CATALOG_COLUMNS, catalog_rows())
    return path


def _close(a: float, b: float, rel: float = 1e-12) -> bool:
    if a == b or (np.isnan(a) and np.isnan(b)):
        return True
    return abs(a - b) <= rel * max(abs(a), abs(b))


def verify_results(results_dir) -> list[str]:
    """Recompute every aggregate row from runs.csv; return the discrepancies."""
    results_dir = Path(results_dir)
    problems = []
    try:
        run_cols, runs = read_csv(results_dir / "runs.csv")
        agg_cols, aggs = read_csv(results_dir / "aggregate.csv")
    except OSError as exc:
        return [f"cannot read results in {results_dir}: {exc.strerror}"]
    if run_cols != RUN_COLUMNS:
        problems.append(f"runs.csv header {run_cols} != {RUN_COLUMNS}")
    if agg_cols != AGGREGATE_COLUMNS:
        problems.append(f"aggregate.csv header {agg_cols} != {AGGREGATE_COLUMNS}")
    if problems:
        return problems

    groups: dict[tuple[str, str], list[dict]] = {}
    for row in runs:
        groups.setdefault((row["algorithm"], row["function"]), []).append(row)
    seen = set()
    for row in aggs:
        key = (row["algorithm"], row["function"])
        seen.add(key)
        members = groups.get(key)
        if not members:
            problems.append(f"{key}: aggregate row without runs")
            continue
        stats = aggregate_values(
            [float(m["best_fitness"]) for m in members], [float(m["elapsed_seconds"]) for m in members]
        )
        expected = {
            "n_runs": stats.n_runs,
            "mean": stats.mean,
            "std": stats.std,
            "median": stats.median,
            "best": stats.best,
            "worst": stats.worst,
            "mean_elapsed_seconds": stats.mean_elapsed,
        }
        for name, value in expected.items():
            if not _close(float(row[name]), float(value)):
                problems.append(f"{key}: {name} is {row[name]}, recomputed {fmt(value)}")
        indices = sorted(int(m["run_index"]) for m in members)
        if indices != list(range(len(members))):
            problems.append(f"{key}: run indices are not 0..{len(members) - 1}")
    for key in groups.keys() - seen:
        problems.append(f"{key}: runs without an aggregate row")

    trace_dir = results_dir / "traces"
    if trace_dir.is_dir():
        for row in runs:
            name = trace_name(Algorithm.parse(row["algorithm"]), row["function"], int(row["run_index"]))
            path = trace_dir / name
            if not path.exists():
                problems.append(f"missing trace {name}")
                continue
            _, points = read_csv(path)
            values = [float(p["best_so_far"]) for p in points]
            if not values or values[-1] != float(row["best_fitness"]):
                problems.append(f"{name}: last value does not match best_fitness")
            if any(b > a for a, b in zip(values, values[1:])):
                problems.append(f"{name}: trace is not non-increasing")
    return problems

