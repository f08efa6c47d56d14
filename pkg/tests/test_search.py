from __future__ import annotations

import numpy as np
import pytest

from conftest import fixture_problem
from tierslicer.errors import AllInvalidError, GenomeLengthMismatchError, TooManySlicesError
from tierslicer.kernels import compile_problem, eval_population
from tierslicer.model import CallRecord, PlacementProblem, Tier
from tierslicer.search import (
    GaConfig,
    crossover,
    exhaustive_oracle,
    genome_to_placement,
    mutate,
    placement_to_genome,
    run,
    run_many,
    seed_population,
    tournament_select,
)


def test_config_validation():
    with pytest.raises(ValueError):
        GaConfig(crossover_prob=1.5)
    with pytest.raises(ValueError):
        GaConfig(population_size=1)
    with pytest.raises(ValueError):
        GaConfig(tournament_size=0)
    with pytest.raises(ValueError):
        GaConfig(tournament_size=31)


def test_seed_population_shape_and_alphabet():
    rng = np.random.default_rng(42)
    pop = seed_population(GaConfig(), 4, rng)
    assert pop.shape == (30, 4)
    assert set(np.unique(pop)) <= {1, 2, 3}
    again = seed_population(GaConfig(), 4, np.random.default_rng(42))
    np.testing.assert_array_equal(pop, again)


def test_mutate_rewrites_exactly_one_position():
    rng = np.random.default_rng(0)
    genome = np.array([1, 2, 3, 1, 2], dtype=np.int8)
    for _ in range(50):
        child = mutate(genome, rng)
        assert (child != genome).sum() <= 1  # the new value may equal the old
        assert set(np.unique(child)) <= {1, 2, 3}
    assert (mutate(np.array([2], dtype=np.int8), rng) != 0).all()


def test_crossover_is_a_positionwise_swap():
    rng = np.random.default_rng(5)
    a = np.array([1, 1, 1, 1], dtype=np.int8)
    b = np.array([2, 2, 2, 2], dtype=np.int8)
    c1, c2 = crossover(a, b, rng)
    np.testing.assert_array_equal(np.sort(np.stack([c1, c2]), axis=0),
                                  np.sort(np.stack([a, b]), axis=0))
    same1, same2 = crossover(a, a.copy(), rng)
    np.testing.assert_array_equal(same1, a)
    np.testing.assert_array_equal(same2, a)
    with pytest.raises(GenomeLengthMismatchError):
        crossover(a, np.array([1, 2], dtype=np.int8), rng)


def test_tournament_ignores_invalid_individuals():
    genomes = np.array([[1], [2], [3]], dtype=np.int8)
    fitness = np.array([0.2, 0.9, 0.5])
    valid = np.array([True, False, True])
    rng = np.random.default_rng(1)
    config = GaConfig(tournament_size=30)  # large sample: every valid index drawn
    winners = {tournament_select(genomes, fitness, valid, config, rng) for _ in range(20)}
    assert winners == {2}  # 0.9 is invalid, 0.5 beats 0.2


def test_tournament_tie_breaks_toward_lexicographically_lower_genome():
    genomes = np.array([[3, 1], [1, 2], [2, 1]], dtype=np.int8)
    fitness = np.array([0.5, 0.5, 0.5])
    valid = np.array([True, True, True])
    config = GaConfig(tournament_size=30)
    rng = np.random.default_rng(2)
    winners = {tournament_select(genomes, fitness, valid, config, rng) for _ in range(20)}
    assert winners == {1}


def test_tournament_with_no_valid_individual_raises():
    genomes = np.array([[1]], dtype=np.int8)
    with pytest.raises(AllInvalidError):
        tournament_select(genomes, np.array([1.0]), np.array([False]), GaConfig(), np.random.default_rng(0))


def test_genome_placement_round_trip():
    problem = fixture_problem("unicorn_v4.tjs")
    genome = np.array([1, 3, 2], dtype=np.int8)
    placement = genome_to_placement(problem, genome)
    assert placement.tier("query") is Tier.CLIENT
    assert placement.tier("entry") is Tier.BOTH
    assert placement.tier("revise") is Tier.SERVER
    np.testing.assert_array_equal(placement_to_genome(problem, placement), genome)


def test_run_is_deterministic():
    problem = fixture_problem("unicorn_v4.tjs")
    config = GaConfig(rng_seed=9)
    a, b = run(problem, config), run(problem, config)
    assert a.best_fitness == b.best_fitness
    assert a.generations_used == b.generations_used
    assert a.history == b.history
    np.testing.assert_array_equal(a.best_genome, b.best_genome)


def test_run_finds_perfect_fitness_and_stops_early():
    result = run(fixture_problem("meetings.tjs"), GaConfig(rng_seed=0))
    assert result.best_fitness == 1.0 and result.best_valid
    assert 1 <= result.generations_used < 300
    assert result.history[-1] == 1.0


def test_run_with_no_unplaced_slices_degenerates(manifest):
    result = run(fixture_problem("tracker.tjs"), GaConfig(rng_seed=0))
    assert result.generations_used == 0
    assert result.best_fitness == pytest.approx(manifest["tracker.tjs"]["oracleFitness"])
    assert result.best_placement.searched == {}


def test_run_returns_valid_best_when_valid_placements_exist():
    problem = fixture_problem("relay.tjs")
    for seed in range(5):
        result = run(problem, GaConfig(rng_seed=seed))
        assert result.best_valid


def test_run_raises_when_every_placement_is_invalid():
    problem = PlacementProblem(
        slices=("srv", "cli", "x"),
        fixed={"srv": Tier.SERVER, "cli": Tier.CLIENT},
        calls=(CallRecord(0, "srv", "cli", "f"),),
    )
    with pytest.raises(AllInvalidError):
        run(problem, GaConfig(rng_seed=0))
    with pytest.raises(AllInvalidError):
        exhaustive_oracle(problem)


def test_oracle_enumerates_the_whole_space(manifest):
    problem = fixture_problem("unicorn_v2.tjs")
    assert len(problem.unplaced) == 2  # 3^2 = 9 placements
    placement, fitness = exhaustive_oracle(problem)
    entry = manifest["unicorn_v2.tjs"]
    assert fitness == pytest.approx(entry["oracleFitness"])
    assert {s: placement.tier(s).value for s in problem.unplaced} == entry["oraclePlacement"]


def test_oracle_cap():
    problem = fixture_problem("unicorn_v6.tjs")
    with pytest.raises(TooManySlicesError):
        exhaustive_oracle(problem, cap=3)


def test_oracle_tie_breaks_toward_lexicographically_first_genome():
    # two slices, no calls: every placement scores 1.0; all-client wins ties
    problem = PlacementProblem(slices=("a", "b"))
    placement, fitness = exhaustive_oracle(problem)
    assert fitness == 1.0
    assert placement.tier("a") is Tier.CLIENT and placement.tier("b") is Tier.CLIENT


def test_ga_never_beats_the_oracle(manifest):
    for name in ("unicorn_v2.tjs", "unicorn_v3.tjs", "unicorn_v4.tjs", "unicorn_v5.tjs"):
        problem = fixture_problem(name)
        oracle_fitness = manifest[name]["oracleFitness"]
        for result in run_many(problem, GaConfig(rng_seed=100), runs=20):
            assert result.best_fitness <= oracle_fitness + 1e-12


def test_run_many_is_parallel_safe():
    problem = fixture_problem("unicorn_v4.tjs")
    config = GaConfig(rng_seed=7)
    serial = run_many(problem, config, runs=6, jobs=1)
    parallel = run_many(problem, config, runs=6, jobs=3)
    for a, b in zip(serial, parallel):
        assert a.best_fitness == b.best_fitness
        assert a.generations_used == b.generations_used
        np.testing.assert_array_equal(a.best_genome, b.best_genome)
