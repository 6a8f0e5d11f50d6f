import itertools

import numpy as np
import pytest

from pcelabs.baselines import (
    EXACT_LIMIT,
    MemeticConfig,
    TabuConfig,
    WarmStartConfig,
    exact_solve,
    memetic_tabu,
    pce_warm_start,
    references_from_exact,
    tabu_search,
)
from pcelabs.labs_core import canonicalize, parse_sequence, sidelobe_energy
from pcelabs.pce_solver import EnergyReferences, PceConfig

BARKER_13 = parse_sequence("+++++--++-+-+")


def brute_levels(n, levels=3):
    energies = set()
    for bits in itertools.product([-1, 1], repeat=n):
        energies.add(sidelobe_energy(np.array(bits, dtype=np.int8)))
    return sorted(energies)[:levels]


@pytest.mark.parametrize("n", [3, 5, 8, 11])
def test_exact_levels_match_brute_force(n):
    result = exact_solve(n)
    assert result.level_energies == brute_levels(n)
    assert result.optimal_energy == result.level_energies[0]


def test_exact_13_finds_barker():
    result = exact_solve(13)
    assert result.optimal_energy == 6
    assert result.level_energies == [6, 14, 18]
    assert result.optimal_merit == pytest.approx(169 / 12)
    # the optimum is unique up to the symmetry group
    assert len(result.canonical_optima) == 1
    np.testing.assert_array_equal(result.canonical_optima[0], canonicalize(BARKER_13))


def test_exact_canonical_optima_all_attain_optimum():
    result = exact_solve(10)
    assert all(sidelobe_energy(x) == result.optimal_energy for x in result.canonical_optima)
    # canonical forms are distinct
    keys = {tuple(x.tolist()) for x in result.canonical_optima}
    assert len(keys) == len(result.canonical_optima)


def test_exact_level_count_request():
    assert len(exact_solve(9, levels=5).level_energies) == 5


def test_exact_range_validation():
    with pytest.raises(ValueError):
        exact_solve(2)
    with pytest.raises(ValueError):
        exact_solve(EXACT_LIMIT + 1)


def test_references_from_exact():
    refs = references_from_exact(exact_solve(13))
    assert refs == EnergyReferences(exact=6, first=14, second=18)


def test_tabu_solves_small_sizes():
    for n, optimum in [(5, 2), (7, 3), (13, 6)]:
        refs = references_from_exact(exact_solve(n))
        result = tabu_search(n, TabuConfig(seed=3), refs)
        assert result.best_energy == optimum
        assert result.evals_to_exact is not None
        assert result.solver == "tabu"


def test_tabu_counters_ordered():
    refs = references_from_exact(exact_solve(13))
    result = tabu_search(13, TabuConfig(seed=41), refs)
    assert result.evals_to_second <= result.evals_to_first <= result.evals_to_exact
    assert result.evals_to_exact <= result.total_evals


def test_tabu_respects_budget():
    result = tabu_search(16, TabuConfig(seed=1, eval_budget=500), references=None)
    assert result.total_evals <= 500
    assert result.best_energy == sidelobe_energy(result.best_sequence)


def test_tabu_deterministic():
    refs = references_from_exact(exact_solve(11))
    a = tabu_search(11, TabuConfig(seed=7), refs)
    b = tabu_search(11, TabuConfig(seed=7), refs)
    assert a.to_dict() == b.to_dict()


def test_tabu_tenure_validation():
    with pytest.raises(ValueError):
        tabu_search(13, TabuConfig(tenure_min=5, tenure_max=2))
    with pytest.raises(ValueError):
        tabu_search(13, TabuConfig(tenure_min=0, tenure_max=2))
    with pytest.raises(ValueError):
        tabu_search(13, TabuConfig(tenure_min=1, tenure_max=13))


def test_tabu_default_tenure_range():
    config = TabuConfig()
    lo, hi = config.resolved_tenure(20)
    assert (lo, hi) == (2, 10)


def test_memetic_requires_population():
    with pytest.raises(ValueError):
        memetic_tabu(5, [], MemeticConfig(seed=0))
    with pytest.raises(ValueError):
        memetic_tabu(5, [np.ones(5, dtype=np.int8)], MemeticConfig(seed=0))


def test_memetic_rejects_length_mismatch():
    pop = [np.ones(5, dtype=np.int8), np.ones(6, dtype=np.int8)]
    with pytest.raises(ValueError):
        memetic_tabu(5, pop, MemeticConfig(seed=0))


def test_memetic_solves_from_random_population():
    rng = np.random.default_rng(5)
    pop = [rng.choice([-1, 1], 13).astype(np.int8) for _ in range(10)]
    refs = references_from_exact(exact_solve(13))
    result = memetic_tabu(13, pop, MemeticConfig(seed=5), refs)
    assert result.best_energy == 6
    assert result.solver == "memetic-tabu"


def test_memetic_deterministic():
    rng = np.random.default_rng(8)
    pop = [rng.choice([-1, 1], 11).astype(np.int8) for _ in range(6)]
    refs = references_from_exact(exact_solve(11))
    a = memetic_tabu(11, [p.copy() for p in pop], MemeticConfig(seed=2), refs)
    b = memetic_tabu(11, [p.copy() for p in pop], MemeticConfig(seed=2), refs)
    assert a.to_dict() == b.to_dict()


def test_warm_start_chains_counters():
    """Counters from the variational phase and the memetic phase live on
    one shared evaluation axis."""
    refs = references_from_exact(exact_solve(13))
    pce = PceConfig(seed=0, iters_per_restart=40, restart_cap=2)
    mt = MemeticConfig(seed=0, eval_budget=300000)
    warm = WarmStartConfig(pce_runs=3, population_copies=6)
    result = pce_warm_start(13, pce, mt, refs, warm)
    assert result.solver == "pce+memetic-tabu"
    assert result.best_energy == 6
    assert result.evals_to_exact <= result.total_evals
    assert result.evals_to_second <= result.evals_to_first <= result.evals_to_exact


def test_warm_start_deterministic():
    refs = references_from_exact(exact_solve(11))
    pce = PceConfig(seed=3, iters_per_restart=30, restart_cap=2)
    mt = MemeticConfig(seed=3, eval_budget=100000)
    warm = WarmStartConfig(pce_runs=2, population_copies=4)
    a = pce_warm_start(11, pce, mt, refs, warm)
    b = pce_warm_start(11, pce, mt, refs, warm)
    assert a.to_dict() == b.to_dict()


def test_warm_start_short_circuits_in_pce_phase():
    # a generous variational budget at N = 7 hits the optimum before the
    # memetic phase ever starts; counters must reflect the early exit
    refs = references_from_exact(exact_solve(7))
    pce = PceConfig(seed=1, iters_per_restart=100, restart_cap=30)
    mt = MemeticConfig(seed=1, eval_budget=10**6)
    result = pce_warm_start(7, pce, mt, refs, WarmStartConfig(pce_runs=20, population_copies=5))
    assert result.best_energy == 3
    assert result.evals_to_exact == result.total_evals
