"""Classical reference solvers: exhaustive search, tabu, memetic tabu.

The exhaustive solver is the ground truth for small N and feeds the
reference energy levels that the time-to-solution counters trigger on.
Tabu search is the classical baseline the variational solver is scaled
against; the memetic variant wraps tabu in a generational loop and can
be seeded from variational solutions (``pce_warm_start``).

Evaluation counting is uniform across solvers: scoring one candidate
sequence costs one evaluation, whether it happens through a full energy
computation or an O(N) incremental flip probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from pcelabs.labs_core import (
    FlipWorkspace,
    as_spin_array,
    canonicalize,
    sidelobe_energy,
)
from pcelabs.pce_solver import (
    EnergyReferences,
    PceConfig,
    SolveResult,
    _CounterState,
    solve as pce_solve,
)

__all__ = [
    "ExactResult",
    "exact_solve",
    "references_from_exact",
    "TabuConfig",
    "tabu_search",
    "MemeticConfig",
    "memetic_tabu",
    "WarmStartConfig",
    "pce_warm_start",
]

EXACT_LIMIT = 32


@dataclass
class ExactResult:
    """Exhaustive-search outcome: distinct low energy levels and the
    canonical form of every optimal sequence."""

    n: int
    optimal_energy: int
    optimal_merit: float
    level_energies: list[int]
    canonical_optima: list[np.ndarray]

    def to_dict(self) -> dict:
        from pcelabs.labs_core import format_sequence

        return {
            "n": self.n,
            "optimal_energy": self.optimal_energy,
            "optimal_merit": self.optimal_merit,
            "level_energies": self.level_energies,
            "canonical_optima": [format_sequence(x) for x in self.canonical_optima],
        }


def exact_solve(N: int, levels: int = 3) -> ExactResult:
    """Enumerate all 2^(N-1) sequences with x_0 = +1 fixed.

    Negation symmetry makes the half-space sufficient for both the level
    energies and the set of optima.  int8 dot products are safe because
    every partial correlation sum is bounded by N < 128.  Refuses N
    beyond 32, where enumeration stops being a desk job.
    """
    if not 3 <= N <= EXACT_LIMIT:
        raise ValueError(f"exact enumeration supports 3 <= N <= {EXACT_LIMIT}")
    if levels < 1:
        raise ValueError("need at least one level")
    total = 1 << (N - 1)
    chunk = 1 << min(N - 1, 18)
    level_pool: set[int] = set()
    best_energy: int | None = None
    opt_codes: list[int] = []
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        codes = np.arange(start, start + count, dtype=np.int64)
        bits = (codes[:, None] >> np.arange(N - 1)[None, :]) & 1
        seqs = np.empty((count, N), dtype=np.int8)
        seqs[:, 0] = 1
        seqs[:, 1:] = (1 - 2 * bits).astype(np.int8)
        energies = np.zeros(count, dtype=np.int64)
        for lag in range(1, N):
            c = np.einsum("ij,ij->i", seqs[:, : N - lag], seqs[:, lag:])
            energies += c.astype(np.int64) ** 2
        for e in np.unique(energies)[: levels + 1]:
            level_pool.add(int(e))
        chunk_best = int(energies.min())
        if best_energy is None or chunk_best < best_energy:
            best_energy = chunk_best
            opt_codes = []
        if chunk_best == best_energy:
            opt_codes.extend(int(c) for c in codes[energies == best_energy])
    level_energies = sorted(level_pool)[:levels]
    canonical: dict[tuple, np.ndarray] = {}
    for code in opt_codes:
        seq = _decode_half_space(code, N)
        canon = canonicalize(seq)
        canonical[tuple(canon)] = canon
    optima = sorted(canonical.values(), key=lambda s: tuple((1 - s) // 2))
    return ExactResult(
        n=N,
        optimal_energy=level_energies[0],
        optimal_merit=N * N / (2.0 * level_energies[0]),
        level_energies=level_energies,
        canonical_optima=optima,
    )


def _decode_half_space(code: int, N: int) -> np.ndarray:
    bits = (code >> np.arange(N - 1)) & 1
    seq = np.empty(N, dtype=np.int64)
    seq[0] = 1
    seq[1:] = 1 - 2 * bits
    return seq


def references_from_exact(result: ExactResult) -> EnergyReferences:
    levels = result.level_energies
    return EnergyReferences(
        exact=levels[0],
        first=levels[1] if len(levels) > 1 else None,
        second=levels[2] if len(levels) > 2 else None,
    )


# ---------------------------------------------------------------------------
# Tabu search.


@dataclass(frozen=True)
class TabuConfig:
    """Single-flip tabu search settings.

    Tenure bounds default to ceil(N/10) and ceil(N/2) when left as None;
    a restart rerandomizes the sequence after stagnation_factor * N moves
    without improving the global best.
    """

    tenure_min: int | None = None
    tenure_max: int | None = None
    eval_budget: int = 10**7
    stagnation_factor: int = 10
    seed: int = 0

    def resolved_tenure(self, N: int) -> tuple[int, int]:
        lo = math.ceil(N / 10) if self.tenure_min is None else self.tenure_min
        hi = math.ceil(N / 2) if self.tenure_max is None else self.tenure_max
        if not 1 <= lo <= hi < N:
            raise ValueError(f"need 1 <= tenure_min <= tenure_max < N, got [{lo}, {hi}]")
        return lo, hi

    def with_seed(self, seed: int) -> "TabuConfig":
        return replace(self, seed=seed)


class _EvalClock:
    """Shared evaluation counter with a hard budget."""

    def __init__(self, budget: int, start: int = 0):
        self.budget = budget
        self.evals = start

    def tick(self) -> int:
        self.evals += 1
        return self.evals

    @property
    def exhausted(self) -> bool:
        return self.evals >= self.budget


def _observe_probe(
    counters: _CounterState, ws: FlipWorkspace, i: int, energy: int, eval_index: int
) -> bool:
    """Counter update for a probed flip; materializes the sequence lazily."""
    if not counters.interested(energy):
        return counters.evals_to_exact is not None
    seq = ws.sequence
    seq[i] = -seq[i]
    return counters.observe(seq, energy, eval_index)


def _tabu_core(
    ws: FlipWorkspace,
    counters: _CounterState,
    clock: _EvalClock,
    rng: np.random.Generator,
    tenure: tuple[int, int],
    stagnation_limit: int,
    max_moves: int | None = None,
) -> None:
    """Run tabu moves on ``ws`` until stagnation, budget, exact, or cap.

    Each move probes all N single flips in index order (one evaluation
    each, counters firing on probe values), then commits the best
    non-tabu flip, where a tabu flip is allowed if it would improve the
    global best.  Ties break toward the lowest index.
    """
    n = ws.n
    tabu_until = np.zeros(n, dtype=np.int64)
    move = 0
    since_improvement = 0
    while since_improvement < stagnation_limit:
        if max_moves is not None and move >= max_moves:
            return
        move += 1
        deltas = ws.propose_all()
        current = ws.energy
        for i in range(n):
            if clock.exhausted:
                return
            if _observe_probe(counters, ws, i, current + int(deltas[i]), clock.tick()):
                return
        allowed = tabu_until <= move
        allowed |= current + deltas < counters.best_energy
        if not allowed.any():
            allowed[:] = True
        masked = np.where(allowed, deltas, np.iinfo(np.int64).max)
        best_idx = int(np.argmin(masked))
        previous_best = counters.best_energy
        ws.commit(best_idx)
        tabu_until[best_idx] = move + int(rng.integers(tenure[0], tenure[1] + 1))
        if ws.energy < previous_best:
            since_improvement = 0
        else:
            since_improvement += 1


def _result_from_counters(
    solver: str, N: int, seed: int, counters: _CounterState, clock: _EvalClock, restarts: int
) -> SolveResult:
    if counters.best_sequence is None:
        raise RuntimeError("no evaluations performed; increase the budget")
    best = canonicalize(counters.best_sequence)
    return SolveResult(
        solver=solver,
        n=N,
        seed=seed,
        best_sequence=best,
        best_energy=counters.best_energy,
        merit_factor=N * N / (2.0 * counters.best_energy),
        total_evals=clock.evals,
        restarts_used=restarts,
        evals_to_exact=counters.evals_to_exact,
        evals_to_first=counters.evals_to_first,
        evals_to_second=counters.evals_to_second,
    )


def tabu_search(
    N: int,
    config: TabuConfig,
    references: EnergyReferences | None = None,
) -> SolveResult:
    """Tabu-driven single-flip search with aspiration and random restarts.

    Runs until the exact reference level is reached (when references are
    given) or the evaluation budget runs out, restarting from a fresh
    random sequence whenever the global best stagnates.  Identical
    (N, config) pairs give identical results.
    """
    if N < 3:
        raise ValueError("sequence length must be >= 3")
    tenure = config.resolved_tenure(N)
    rng = np.random.default_rng(config.seed)
    counters = _CounterState(N, references)
    clock = _EvalClock(config.eval_budget)
    restarts = 0
    spins = np.array([-1, 1])
    while not clock.exhausted and counters.evals_to_exact is None:
        restarts += 1
        ws = FlipWorkspace(rng.choice(spins, N))
        if counters.observe(ws.sequence, ws.energy, clock.tick()):
            break
        _tabu_core(
            ws,
            counters,
            clock,
            rng,
            tenure,
            stagnation_limit=config.stagnation_factor * N,
        )
    return _result_from_counters("tabu", N, config.seed, counters, clock, restarts)


# ---------------------------------------------------------------------------
# Memetic tabu search.


@dataclass(frozen=True)
class MemeticConfig:
    """Generational loop settings for the memetic tabu solver.

    Steady-state reproduction: every generation selects two parents by
    tournament, produces one offspring by uniform crossover and per-bit
    mutation (rate 1/N when None), improves it with a bounded tabu run,
    and replaces the worst member if the offspring beats it.
    """

    eval_budget: int = 10**7
    tournament_size: int = 3
    mutation_rate: float | None = None
    local_moves: int = 100
    local_stagnation: int = 30
    tenure_min: int | None = None
    tenure_max: int | None = None
    seed: int = 0

    def resolved_tenure(self, N: int) -> tuple[int, int]:
        return TabuConfig(self.tenure_min, self.tenure_max).resolved_tenure(N)

    def resolved_mutation_rate(self, N: int) -> float:
        return 1.0 / N if self.mutation_rate is None else self.mutation_rate

    def with_seed(self, seed: int) -> "MemeticConfig":
        return replace(self, seed=seed)


def memetic_tabu(
    N: int,
    population: list[np.ndarray],
    config: MemeticConfig,
    references: EnergyReferences | None = None,
    _clock: _EvalClock | None = None,
    _counters: _CounterState | None = None,
    _solver_tag: str = "memetic-tabu",
) -> SolveResult:
    """Memetic search over an explicit starting population.

    The private clock/counter arguments let a caller chain this phase
    onto evaluations already spent (warm starting); they default to a
    fresh count.
    """
    if len(population) < 2:
        raise ValueError("population needs at least 2 members")
    members = [as_spin_array(x) for x in population]
    if any(m.size != N for m in members):
        raise ValueError("population member length differs from N")
    tenure = config.resolved_tenure(N)
    mutation_rate = config.resolved_mutation_rate(N)
    rng = np.random.default_rng(config.seed)
    counters = _counters if _counters is not None else _CounterState(N, references)
    clock = _clock if _clock is not None else _EvalClock(config.eval_budget)
    energies = []
    for member in members:
        if clock.exhausted:
            break
        energy = sidelobe_energy(member)
        energies.append(energy)
        if counters.observe(member, energy, clock.tick()):
            break
    generations = 0
    while not clock.exhausted and counters.evals_to_exact is None:
        generations += 1
        child = _crossover(
            _tournament(members, energies, config.tournament_size, rng),
            _tournament(members, energies, config.tournament_size, rng),
            rng,
        )
        flips = rng.random(N) < mutation_rate
        child[flips] = -child[flips]
        ws = FlipWorkspace(child)
        if counters.observe(ws.sequence, ws.energy, clock.tick()):
            break
        _tabu_core(
            ws,
            counters,
            clock,
            rng,
            tenure,
            stagnation_limit=config.local_stagnation,
            max_moves=config.local_moves,
        )
        improved = ws.sequence
        improved_energy = ws.energy
        worst = int(np.argmax(energies))
        if improved_energy < energies[worst]:
            members[worst] = improved
            energies[worst] = improved_energy
    return _result_from_counters(
        _solver_tag, N, config.seed, counters, clock, generations
    )


def _tournament(
    members: list[np.ndarray], energies: list[int], size: int, rng: np.random.Generator
) -> np.ndarray:
    picks = rng.integers(len(members), size=max(1, size))
    best = min(picks, key=lambda i: energies[i])
    return members[best]


def _crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    take_a = rng.random(a.size) < 0.5
    return np.where(take_a, a, b)


# ---------------------------------------------------------------------------
# Variational warm start.


@dataclass(frozen=True)
class WarmStartConfig:
    """How many short variational solves feed the memetic population."""

    pce_runs: int = 150
    population_copies: int = 50


def pce_warm_start(
    N: int,
    pce_config: PceConfig,
    mt_config: MemeticConfig,
    references: EnergyReferences | None = None,
    warm: WarmStartConfig = WarmStartConfig(),
) -> SolveResult:
    """Short variational solves seeding a memetic tabu run.

    Runs ``warm.pce_runs`` independent short-budget variational solves,
    copies the best decoded sequence ``warm.population_copies`` times as
    the memetic starting population, and continues with memetic tabu.
    The evaluation counter accumulates across every phase, so the
    counters end up on one shared time axis.  The run short-circuits as
    soon as the exact level triggers.
    """
    if warm.pce_runs < 1 or warm.population_copies < 2:
        raise ValueError("need >= 1 variational run and >= 2 population copies")
    counters = _CounterState(N, references)
    clock = _EvalClock(mt_config.eval_budget)
    best_energy: int | None = None
    best_sequence: np.ndarray | None = None
    runs_used = 0
    for run in range(warm.pce_runs):
        runs_used += 1
        run_config = pce_config.with_seed(_derive_seed(pce_config.seed, run))
        result = pce_solve(N, run_config, references)
        offset = clock.evals
        clock.evals += result.total_evals
        _merge_counters(counters, result, offset)
        if best_energy is None or result.best_energy < best_energy:
            best_energy = result.best_energy
            best_sequence = result.best_sequence
        counters.observe(result.best_sequence, result.best_energy, clock.evals)
        if counters.evals_to_exact is not None or clock.exhausted:
            break
    if counters.evals_to_exact is None and not clock.exhausted:
        population = [best_sequence.copy() for _ in range(warm.population_copies)]
        return memetic_tabu(
            N,
            population,
            mt_config,
            references,
            _clock=clock,
            _counters=counters,
            _solver_tag="pce+memetic-tabu",
        )
    return _result_from_counters(
        "pce+memetic-tabu", N, pce_config.seed, counters, clock, runs_used
    )


def _derive_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1, np.uint64)[0])


def _merge_counters(counters: _CounterState, result: SolveResult, offset: int) -> None:
    if counters.evals_to_second is None and result.evals_to_second is not None:
        counters.evals_to_second = offset + result.evals_to_second
    if counters.evals_to_first is None and result.evals_to_first is not None:
        counters.evals_to_first = offset + result.evals_to_first
    if counters.evals_to_exact is None and result.evals_to_exact is not None:
        counters.evals_to_exact = offset + result.evals_to_exact
