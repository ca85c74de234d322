import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from royale.bro import (
    BroState,
    bro_move,
    bro_run,
    bro_step,
    delta_schedule,
    init_state,
    initial_delta,
    next_delta,
    shrink_space,
)
from royale.core import ConfigurationError, Individual, OptimizerConfig, Population, SearchSpace, make_rng
from royale.mbro import mbro_step
from royale.problems import get_problem

from reference import reference_sweep


@pytest.mark.parametrize("max_iter, expected", [(500, 185), (100, 50), (10, 10), (2, 7), (1000, 333)])
def test_initial_delta(max_iter, expected):
    assert initial_delta(max_iter) == expected


def test_initial_delta_needs_two_iterations():
    with pytest.raises(ConfigurationError):
        initial_delta(1)


@pytest.mark.parametrize("delta, expected", [(185, 278), (2, 3), (1, 2), (278, 417), (3, 5)])
def test_next_delta(delta, expected):
    assert next_delta(delta) == expected


def test_schedule_for_500():
    assert delta_schedule(500)[:3] == [185, 278, 417]
    assert delta_schedule(500) == [185, 278, 417]
    assert delta_schedule(1) == []


class TestBroMove:
    def test_loser_at_best_unchanged(self):
        x = np.array([1.5, -2.0, 3.0])
        np.testing.assert_array_equal(bro_move(x, x.copy(), make_rng(0)), x)

    def test_r_zero(self, stub_rng):
        x = np.array([1.0, 2.0])
        np.testing.assert_array_equal(bro_move(x, [9.0, -9.0], stub_rng(0.0)), x)

    def test_r_one(self, stub_rng):
        np.testing.assert_array_equal(bro_move([1.0, 2.0], [9.0, -9.0], stub_rng(1.0)), [9.0, -9.0])

    def test_one_draw_per_dimension(self, stub_rng):
        np.testing.assert_array_equal(bro_move([0.0, 0.0], [4.0, 4.0], stub_rng(0.25, 0.5)), [1.0, 2.0])


class TestShrinkSpace:
    def test_collapsed_population(self):
        space = SearchSpace.box(-10.0, 10.0, dim=2)
        pop = [Individual(np.array([1.0, 2.0]), 0.0) for _ in range(4)]
        new = shrink_space(pop, pop[0], space)
        np.testing.assert_array_equal(new.lower, [1.0, 2.0])
        np.testing.assert_array_equal(new.upper, [1.0, 2.0])

    def test_population_sd(self):
        space = SearchSpace.box(-10.0, 10.0, dim=1)
        pop = [Individual(np.array([-1.0]), 1.0), Individual(np.array([1.0]), 1.0)]
        new = shrink_space(pop, Individual(np.array([0.0]), 0.0), space)
        np.testing.assert_array_equal(new.lower, [-1.0])
        np.testing.assert_array_equal(new.upper, [1.0])

    def test_cut_back_to_original(self):
        space = SearchSpace.box(-1.0, 1.0, dim=1)
        pop = [Individual(np.array([-1.0]), 0.0), Individual(np.array([1.0]), 0.0)]
        new = shrink_space(pop, Individual(np.array([0.9]), 0.0), space)
        assert new.lower[0] == pytest.approx(-0.1) and new.upper[0] == 1.0
        np.testing.assert_array_equal(new.original_lower, [-1.0])

    def test_accepts_population(self):
        space = SearchSpace.box(-10.0, 10.0, dim=1)
        pop = Population.from_individuals([Individual(np.array([v]), 0.0) for v in (-1.0, 1.0)])
        assert shrink_space(pop, pop[0], space).upper[0] == 0.0


def small_state(positions, fitness_problem="f1", damage=None):
    problem = get_problem(fitness_problem, dimension=len(positions[0]))
    pos = np.array(positions, dtype=float)
    pop = Population(pos, np.array([problem(p) for p in pos]), np.zeros(len(pos), dtype=np.int64))
    if damage is not None:
        pop.damage[:] = damage
    k = int(np.argmin(pop.fitness))
    space = SearchSpace.box(*problem.bounds())
    return problem, BroState(pop, space, pop[k], 0, 185, 0, len(pos))


class TestBroStep:
    def test_pair_bookkeeping(self):
        # f1 is shifted to -30, so individual 0 is strictly better
        problem, state = small_state([[-30.0, -30.0], [50.0, 50.0]])
        bro_step(state, problem, OptimizerConfig(pop_size=2), make_rng(0))
        # i=0 duel: 1 loses and moves toward best; i=1 duel: 1 loses again
        assert state.population.damage[0] == 0
        assert state.population.damage[1] == 2
        np.testing.assert_array_equal(state.population.positions[0], [-30.0, -30.0])
        assert state.best.fitness == 0.0

    def test_single_duel_damage(self):
        problem, state = small_state([[-30.0, -30.0], [50.0, 50.0], [90.0, 90.0]])
        before = copy.deepcopy(state.population)
        bro_step(state, problem, OptimizerConfig(pop_size=3), make_rng(1))
        assert state.population.damage[0] == 0
        np.testing.assert_array_equal(state.population.positions[0], before.positions[0])

    def test_respawn_at_threshold(self):
        problem, state = small_state([[-30.0, -30.0], [50.0, 50.0]], damage=[0, 2])
        bro_step(state, problem, OptimizerConfig(pop_size=2, damage_threshold=3), make_rng(3))
        # first duel takes individual 1 to the threshold and respawns it; the
        # second duel then damages exactly one of the pair
        assert sorted(state.population.damage) == [0, 1]
        assert not np.array_equal(state.population.positions[1], [50.0, 50.0])
        assert state.evaluations == 2 + 2

    def test_respawn_position_drawn_in_current_box(self):
        problem, state = small_state([[-30.0, -30.0], [-29.0, -29.0]], damage=[0, 2])
        lower, upper = np.array([-40.0, -35.0]), np.array([-20.0, -25.0])
        state.space = SearchSpace(lower, upper, [-100.0, -100.0], [100.0, 100.0])
        u = make_rng(5).random(4)
        # first duel respawns individual 1 with two draws, the second duel
        # moves it back toward the best with two more
        respawned = u[:2] * (upper - lower) + lower
        expected = np.minimum(np.maximum(respawned + u[2:] * (np.array([-30.0, -30.0]) - respawned), lower), upper)
        bro_step(state, problem, OptimizerConfig(pop_size=2), make_rng(5))
        np.testing.assert_array_equal(state.population.positions[1], expected)
        assert list(state.population.damage) == [0, 1]

    def test_mbro_needs_lambdas(self):
        problem, state = small_state([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ValueError):
            mbro_step(state, problem, OptimizerConfig(pop_size=2), make_rng(0))


def check_invariants(state, prev_best, threshold):
    pop, space = state.population, state.space
    assert np.all(pop.positions >= space.lower) and np.all(pop.positions <= space.upper)
    assert np.all(space.lower >= space.original_lower) and np.all(space.upper <= space.original_upper)
    assert np.all(space.lower <= space.upper)
    assert np.all((pop.damage >= 0) & (pop.damage <= threshold - 1))
    assert state.best.fitness <= prev_best
    assert state.best.fitness <= pop.fitness.min()


@pytest.mark.parametrize("fid", ["f1", "f5", "f9", "f7", "f15"])
@pytest.mark.parametrize("mbro", [False, True])
def test_invariants_over_many_steps(fid, mbro):
    problem = get_problem(fid, dimension=None if fid == "f15" else 5)
    config = OptimizerConfig(pop_size=12, max_iter=60, algorithm="MBRO" if mbro else "BRO")
    step = mbro_step if mbro else bro_step
    for seed in range(4):
        rng = make_rng(seed)
        state = init_state(problem, config, rng, with_lambda=mbro)
        deltas = []
        for _ in range(config.max_iter):
            prev_best, prev_delta = state.best.fitness, state.delta
            step(state, problem, config, rng)
            if state.delta != prev_delta:
                deltas.append(prev_delta)
                assert state.iteration == prev_delta
                assert state.delta > state.iteration
            check_invariants(state, prev_best, config.damage_threshold)
        assert deltas == delta_schedule(config.max_iter) == [34, 51]
        assert state.shrink_count == len(deltas)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), threshold=st.integers(1, 5), mbro=st.booleans(), n=st.integers(2, 9))
def test_invariants_property(seed, threshold, mbro, n):
    problem = get_problem("f11", dimension=3)
    config = OptimizerConfig(pop_size=n, max_iter=40, damage_threshold=threshold)
    rng = make_rng(seed)
    state = init_state(problem, config, rng, with_lambda=mbro)
    step = mbro_step if mbro else bro_step
    for _ in range(config.max_iter):
        prev = state.best.fitness
        step(state, problem, config, rng)
        check_invariants(state, prev, threshold)


@pytest.mark.parametrize("step", [bro_step, mbro_step])
def test_winner_position_unchanged_across_sweep(step):
    # an individual sitting on the global optimum wins every duel it is part of
    problem = get_problem("f1", dimension=3)
    config = OptimizerConfig(pop_size=10, max_iter=5)
    rng = make_rng(8)
    state = init_state(problem, config, rng, with_lambda=step is mbro_step)
    state.population.positions[4] = problem.shift
    state.population.fitness[4] = 0.0
    lam = None if state.population.lambdas is None else state.population.lambdas[4].copy()
    for _ in range(3):
        step(state, problem, config, rng)
        np.testing.assert_array_equal(state.population.positions[4], problem.shift)
        assert state.population.damage[4] == 0
        if lam is not None:
            np.testing.assert_array_equal(state.population.lambdas[4], lam)


def test_shrink_fires_on_schedule():
    problem = get_problem("f1", dimension=4)
    config = OptimizerConfig(pop_size=10, max_iter=500)
    seen = []
    bro_run(problem, config, make_rng(0), callback=lambda s: seen.append((s.iteration, s.shrink_count)))
    fired = [it for (it, c), (_, prev) in zip(seen, [(0, 0)] + seen) if c != prev]
    assert fired == [185, 278, 417]


@pytest.mark.parametrize("fid", ["f1", "f7", "f12"])
@pytest.mark.parametrize("mbro", [False, True])
def test_compiled_sweep_matches_reference(fid, mbro):
    problem = get_problem(fid, dimension=4)
    config = OptimizerConfig(pop_size=8, max_iter=30, damage_threshold=2)
    step = mbro_step if mbro else bro_step
    fast_rng, ref_rng = make_rng(11), make_rng(11)
    fast = init_state(problem, config, fast_rng, with_lambda=mbro)
    ref = init_state(problem, config, ref_rng, with_lambda=mbro)
    for _ in range(config.max_iter):
        step(fast, problem, config, fast_rng)
        reference_sweep(ref, problem, config, ref_rng, mbro)
        assert fast.population.positions.tobytes() == ref.population.positions.tobytes()
        assert fast.population.fitness.tobytes() == ref.population.fitness.tobytes()
        np.testing.assert_array_equal(fast.population.damage, ref.population.damage)
        if mbro:
            assert fast.population.lambdas.tobytes() == ref.population.lambdas.tobytes()
        assert fast.best.fitness == ref.best.fitness
        assert (fast.delta, fast.shrink_count, fast.evaluations) == (ref.delta, ref.shrink_count, ref.evaluations)
    assert fast_rng.random() == ref_rng.random()


class TestBroRun:
    def test_single_iteration(self):
        res = bro_run(get_problem("f1", dimension=2), OptimizerConfig(pop_size=2, max_iter=1), make_rng(0))
        assert len(res.convergence_trace) == 1
        assert res.best_fitness == res.convergence_trace[-1]

    def test_same_seed_same_trace(self):
        problem = get_problem("f9", dimension=6)
        config = OptimizerConfig(pop_size=10, max_iter=50)
        a = bro_run(problem, config, make_rng(4))
        b = bro_run(problem, config, make_rng(4))
        assert a.convergence_trace.tobytes() == b.convergence_trace.tobytes()
        assert a.best_position.tobytes() == b.best_position.tobytes()
        c = bro_run(problem, config, make_rng(5))
        assert c.convergence_trace.tobytes() != a.convergence_trace.tobytes()

    def test_trace_monotone_and_counts(self):
        problem = get_problem("f3", dimension=5)
        config = OptimizerConfig(pop_size=10, max_iter=100)
        res = bro_run(problem, config, make_rng(2))
        assert np.all(np.diff(res.convergence_trace) <= 0)
        # initial swarm, one evaluation per duel, plus re-clamped points after shrinks
        assert res.evaluations >= 10 + 10 * 100
        assert res.extra["shrinks"] == len(delta_schedule(100))
        assert problem(res.best_position) == res.best_fitness
