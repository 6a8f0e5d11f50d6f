"""Variational LABS solver through Pauli correlation encoding.

Each sequence entry is carried by one Pauli string: x_i = sign(<P_i>)
on an n-qubit state with n much smaller than N.  Training relaxes the
sign through x~_i = tanh(alpha <P_i>) and descends

    L(theta) = sum_l C_l(x~)^2 - beta * sum_i x~_i^2,

whose first term is the sidelobe energy of the relaxation (so L equals
the integer energy exactly on binary points when beta = 0) and whose
second term pushes the correlations toward +-1.  After every loss
evaluation the current state is decoded to integers and scored, which is
what the time-to-solution counters measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from pcelabs import _kernels, state_sim
from pcelabs.labs_core import as_spin_array, canonicalize, sidelobe_energy
from pcelabs.pauli_algebra import (
    PauliSet,
    sample_anticommuting_set,
    sample_commuting_set,
)
from pcelabs.state_sim import AnsatzSpec

__all__ = [
    "PceConfig",
    "EnergyReferences",
    "SolveResult",
    "LossContext",
    "relax",
    "relaxed_loss",
    "relaxed_loss_gradient",
    "decode",
    "parameter_shift_gradient",
    "solve",
]


def relax(expectations: np.ndarray, alpha: float) -> np.ndarray:
    """Soft sign x~ = tanh(alpha * e); keeps values strictly inside (-1, 1)."""
    return np.tanh(alpha * np.asarray(expectations, dtype=np.float64))


def _soft_autocorrelations(x_tilde: np.ndarray) -> np.ndarray:
    full = np.correlate(x_tilde, x_tilde, mode="full")
    return full[x_tilde.size :]


def relaxed_loss(x_tilde: np.ndarray, beta: float) -> float:
    """L = sum_l C_l(x~)^2 - beta sum_i x~_i^2.

    On a binary +-1 vector with beta = 0 this equals the integer sidelobe
    energy exactly (all intermediate floats are integers below 2^53).
    """
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    c = _soft_autocorrelations(x_tilde)
    return float(np.dot(c, c) - beta * np.dot(x_tilde, x_tilde))


def relaxed_loss_gradient(x_tilde: np.ndarray, beta: float) -> np.ndarray:
    """dL/dx~ for the relaxed loss, via two length-N convolutions."""
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    n = x_tilde.size
    c = _soft_autocorrelations(x_tilde)
    padded = np.concatenate(([0.0], c))
    left = np.convolve(x_tilde, padded)[:n]
    right = np.convolve(x_tilde[::-1], padded)[:n][::-1]
    return 2.0 * (left + right) - 2.0 * beta * x_tilde


def decode(expectations: np.ndarray) -> np.ndarray:
    """Hard sign readout; ties at exactly 0 go to +1."""
    e = np.asarray(expectations)
    return np.where(e >= 0, 1, -1).astype(np.int64)


class EnergyReferences(NamedTuple):
    """Energy levels that trigger the time-to-solution counters."""

    exact: int
    first: int | None = None
    second: int | None = None


@dataclass(frozen=True)
class PceConfig:
    """Solver settings; defaults follow the N = 13 working point."""

    n_qubits: int = 4
    layers: int = 15
    pauli_mode: str = "anticommuting"
    alpha: float | None = None
    beta: float = 15.0
    optimizer: str = "adam"
    step_size: float = 0.3
    iters_per_restart: int = 200
    restart_cap: int = 1000
    shots: int = 0
    seed: int = 0
    count_gradient_evals: bool = False
    engine: str = "auto"

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("need at least 2 qubits")
        if self.layers < 1:
            raise ValueError("need at least 1 layer")
        if self.pauli_mode not in ("anticommuting", "commuting"):
            raise ValueError(f"unknown pauli_mode {self.pauli_mode!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.engine not in ("auto", "numba", "numpy"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.resolved_alpha() <= 1.0:
            raise ValueError("alpha must exceed 1 so decoding can saturate")
        if self.shots < 0:
            raise ValueError("shots must be >= 0 (0 means exact expectations)")
        if self.iters_per_restart < 0:
            raise ValueError("iters_per_restart must be >= 0")
        if self.restart_cap < 1:
            raise ValueError("restart_cap must be >= 1")

    def resolved_alpha(self) -> float:
        return 1.5 * self.n_qubits if self.alpha is None else float(self.alpha)

    def ansatz(self) -> AnsatzSpec:
        return AnsatzSpec(self.n_qubits, self.layers)

    def with_seed(self, seed: int) -> "PceConfig":
        return replace(self, seed=seed)


@dataclass
class SolveResult:
    """Outcome of one solver run, counters included.

    ``evals_to_exact`` (and the first/second-level variants) hold the
    1-based index of the loss evaluation whose decoded energy first
    reached the corresponding reference level, or None if never reached.
    """

    solver: str
    n: int
    seed: int
    best_sequence: np.ndarray
    best_energy: int
    merit_factor: float
    total_evals: int
    restarts_used: int
    evals_to_exact: int | None = None
    evals_to_first: int | None = None
    evals_to_second: int | None = None

    def to_dict(self) -> dict:
        from pcelabs.labs_core import format_sequence

        return {
            "solver": self.solver,
            "n": self.n,
            "seed": self.seed,
            "best_sequence": format_sequence(self.best_sequence),
            "best_energy": self.best_energy,
            "merit_factor": self.merit_factor,
            "total_evals": self.total_evals,
            "restarts_used": self.restarts_used,
            "evals_to_exact": self.evals_to_exact,
            "evals_to_first": self.evals_to_first,
            "evals_to_second": self.evals_to_second,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SolveResult":
        from pcelabs.labs_core import parse_sequence

        return cls(
            solver=doc["solver"],
            n=doc["n"],
            seed=doc["seed"],
            best_sequence=parse_sequence(doc["best_sequence"]),
            best_energy=doc["best_energy"],
            merit_factor=doc["merit_factor"],
            total_evals=doc["total_evals"],
            restarts_used=doc["restarts_used"],
            evals_to_exact=doc.get("evals_to_exact"),
            evals_to_first=doc.get("evals_to_first"),
            evals_to_second=doc.get("evals_to_second"),
        )


def _pauli_tables(paulis: Sequence, dim: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.empty((len(paulis), dim), dtype=np.int64)
    coeffs = np.empty((len(paulis), dim), dtype=np.complex128)
    for i, pauli in enumerate(paulis):
        perm, coeff = state_sim._pauli_tables(pauli, dim)
        perms[i] = perm
        coeffs[i] = coeff
    return perms, coeffs


class LossContext:
    """Loss, expectations, and gradients for one ansatz + Pauli set.

    Owns the evaluation counter: every decoded loss evaluation adds 1,
    and each analytic gradient adds 2 * P more when
    ``count_gradient_evals`` is set (the cost a parameter-shift pass
    would bill on hardware).  Gradients are always computed from exact
    expectations; finite shots affect only loss evaluation and decoding.
    """

    def __init__(
        self,
        spec: AnsatzSpec,
        paulis: Sequence,
        alpha: float,
        beta: float,
        shots: int = 0,
        rng: np.random.Generator | None = None,
        engine: str = "auto",
        count_gradient_evals: bool = False,
    ):
        self.spec = spec
        self.paulis = list(paulis)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.shots = int(shots)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.count_gradient_evals = count_gradient_evals
        self.evals = 0
        self.program = spec.gate_program()
        self.perms, self.coeffs = _pauli_tables(self.paulis, 1 << spec.n)
        if engine == "auto":
            engine = "numba" if _kernels.HAVE_NUMBA else "numpy"
        if engine == "numba" and not _kernels.HAVE_NUMBA:
            raise RuntimeError("numba engine requested but numba is unavailable")
        self.engine = engine

    # -- raw engine calls (uncounted) --

    def exact_expectations(self, thetas: np.ndarray) -> np.ndarray:
        """(B, N) exact expectation matrix for a (B, P) angle matrix."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        if self.engine == "numba":
            states = _kernels.evolve_batch(
                self.program.kinds,
                self.program.args,
                self.program.params,
                thetas,
                self.spec.n,
            )
            return _kernels.pauli_expectations(states, self.perms, self.coeffs)
        states = state_sim.run_ansatz_batch(self.spec, thetas)
        return state_sim.expectations_batch(states, self.paulis)

    def _sample(self, exact: np.ndarray) -> np.ndarray:
        """Finite-shot estimate of an exact expectation array.

        A parity measurement is a Bernoulli draw with success probability
        (1 + e) / 2, so sampling the binomial directly is distributed
        identically to simulating the rotated-basis measurement.
        """
        p = np.clip((1.0 + exact) / 2.0, 0.0, 1.0)
        hits = self.rng.binomial(self.shots, p)
        return (2.0 * hits - self.shots) / self.shots

    def expectations(self, theta: np.ndarray) -> np.ndarray:
        """(N,) expectations for one angle vector; sampled when shots > 0."""
        exact = self.exact_expectations(theta)[0]
        if self.shots > 0:
            return self._sample(exact)
        return exact

    # -- counted evaluations --

    def loss_from_expectations(self, expectations: np.ndarray) -> float:
        return relaxed_loss(relax(expectations, self.alpha), self.beta)

    def value_and_expectations(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        """One counted loss evaluation; returns (loss, expectations)."""
        e = self.expectations(theta)
        self.evals += 1
        return self.loss_from_expectations(e), e

    def value(self, theta: np.ndarray) -> float:
        return self.value_and_expectations(theta)[0]

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        """Analytic dL/dtheta (adjoint sweep on the numba engine,
        parameter shift otherwise); equal to parameter shift either way."""
        theta = np.asarray(theta, dtype=np.float64)
        if self.engine == "numba":
            grad = self._gradient_adjoint(theta)
        else:
            grad = parameter_shift_gradient(self, theta)
        if self.count_gradient_evals:
            self.evals += 2 * self.program.param_count
        return grad

    def step(self, theta: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Fused counted loss + uncounted-gradient evaluation."""
        loss, e = self.value_and_expectations(theta)
        grad = self.gradient(theta)
        return loss, e, grad

    def _loss_weights(self, exact_e: np.ndarray) -> np.ndarray:
        x_tilde = relax(exact_e, self.alpha)
        gx = relaxed_loss_gradient(x_tilde, self.beta)
        return gx * self.alpha * (1.0 - x_tilde**2)

    def _gradient_adjoint(self, theta: np.ndarray) -> np.ndarray:
        psi = _kernels.evolve_batch(
            self.program.kinds,
            self.program.args,
            self.program.params,
            theta[None, :],
            self.spec.n,
        )[0]
        exact_e = _kernels.pauli_expectations(psi[None, :], self.perms, self.coeffs)[0]
        weights = self._loss_weights(exact_e)
        return _kernels.adjoint_gradient(
            self.program.kinds,
            self.program.args,
            self.program.params,
            theta,
            self.spec.n,
            self.perms,
            self.coeffs,
            weights,
            psi,
        )


def parameter_shift_gradient(ctx: LossContext, theta: np.ndarray) -> np.ndarray:
    """dL/dtheta from two exact evaluations per parameter.

    Every gate generator here has eigenvalues +-1/2 scaled into
    exp(-i t G / 2) form, so d<P>/dt = (<P>(t + pi/2) - <P>(t - pi/2)) / 2
    holds exactly; the loss gradient follows by the chain rule through
    x~ = tanh(alpha e).
    """
    theta = np.asarray(theta, dtype=np.float64)
    p = theta.size
    batch = np.repeat(theta[None, :], 2 * p + 1, axis=0)
    idx = np.arange(p)
    batch[2 * idx + 1, idx] += math.pi / 2.0
    batch[2 * idx + 2, idx] -= math.pi / 2.0
    ex = ctx.exact_expectations(batch)
    weights = ctx._loss_weights(ex[0])
    shifts = (ex[1::2] - ex[2::2]) / 2.0
    return shifts @ weights


class _Adam:
    def __init__(self, size: int, step: float, b1=0.9, b2=0.999, eps=1e-8):
        self.step = step
        self.b1, self.b2, self.eps = b1, b2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def update(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * grad
        self.v = self.b2 * self.v + (1 - self.b2) * grad**2
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        return theta - self.step * m_hat / (np.sqrt(v_hat) + self.eps)


class _Sgd:
    def __init__(self, size: int, step: float):
        self.step = step

    def update(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return theta - self.step * grad


def _make_optimizer(config: PceConfig, size: int):
    if config.optimizer == "adam":
        return _Adam(size, config.step_size)
    return _Sgd(size, config.step_size)


def _sample_pauli_set(
    config: PceConfig, count: int, rng: np.random.Generator
) -> PauliSet:
    """Draw a correlator set and assign its strings to random positions.

    The growth procedures return strict-relation strings first; leaving
    them clustered at the low sequence positions measurably slows the
    search, so the assignment is permuted.
    """
    if config.pauli_mode == "anticommuting":
        drawn = sample_anticommuting_set(config.n_qubits, count, rng)
    else:
        drawn = sample_commuting_set(config.n_qubits, count, rng)
    perm = rng.permutation(count)
    return PauliSet(
        n=drawn.n,
        mode=drawn.mode,
        paulis=[drawn.paulis[i] for i in perm],
        strict_count=drawn.strict_count,
    )


class _CounterState:
    """Tracks best-so-far and the first crossing of each reference level."""

    def __init__(self, n: int, references: EnergyReferences | None):
        self.n = n
        self.references = references
        self.best_energy: int | None = None
        self.best_sequence: np.ndarray | None = None
        self.evals_to_exact: int | None = None
        self.evals_to_first: int | None = None
        self.evals_to_second: int | None = None

    def interested(self, energy: int) -> bool:
        """Whether observing this energy could change any recorded state.

        Lets callers skip materializing candidate sequences for probes
        that would neither improve the best nor trigger a counter.
        """
        if self.best_energy is None or energy < self.best_energy:
            return True
        refs = self.references
        if refs is None:
            return False
        if refs.second is not None and self.evals_to_second is None:
            if energy <= refs.second:
                return True
        if refs.first is not None and self.evals_to_first is None:
            if energy <= refs.first:
                return True
        return self.evals_to_exact is None and energy <= refs.exact

    def observe(self, sequence: np.ndarray, energy: int, eval_index: int) -> bool:
        """Record one decoded sequence; True once the exact level is hit."""
        if self.best_energy is None or energy < self.best_energy:
            self.best_energy = energy
            self.best_sequence = sequence.copy()
        refs = self.references
        if refs is None:
            return False
        if refs.second is not None and self.evals_to_second is None:
            if energy <= refs.second:
                self.evals_to_second = eval_index
        if refs.first is not None and self.evals_to_first is None:
            if energy <= refs.first:
                self.evals_to_first = eval_index
        if self.evals_to_exact is None and energy <= refs.exact:
            self.evals_to_exact = eval_index
        return self.evals_to_exact is not None


def solve(
    N: int,
    config: PceConfig,
    references: EnergyReferences | None = None,
) -> SolveResult:
    """Run the variational solver until the exact level or the restart cap.

    Each restart draws a fresh Pauli set and fresh uniform angles in
    [-pi, pi), then descends the relaxed loss.  After every counted loss
    evaluation the expectations are decoded and scored; counters record
    the first eval index at which each reference level was met.  Without
    references the solver runs its full budget and reports the best
    sequence seen.  Identical (N, config) pairs give identical results.
    """
    if N < 3:
        raise ValueError("sequence length must be >= 3")
    rng = np.random.default_rng(config.seed)
    spec = config.ansatz()
    counters = _CounterState(N, references)
    restarts_used = 0
    total_evals = 0
    done = False
    for _ in range(config.restart_cap):
        restarts_used += 1
        pauli_set = _sample_pauli_set(config, N, rng)
        ctx = LossContext(
            spec,
            pauli_set.paulis,
            alpha=config.resolved_alpha(),
            beta=config.beta,
            shots=config.shots,
            rng=rng,
            engine=config.engine,
            count_gradient_evals=config.count_gradient_evals,
        )
        ctx.evals = total_evals
        theta = rng.uniform(-math.pi, math.pi, spec.param_count)
        optimizer = _make_optimizer(config, spec.param_count)
        # The initial angles are evaluated and decoded too, so a restart
        # costs iters_per_restart + 1 loss evaluations.
        for it in range(config.iters_per_restart + 1):
            if it < config.iters_per_restart:
                _, e, grad = ctx.step(theta)
            else:
                _, e = ctx.value_and_expectations(theta)
                grad = None
            sequence = decode(e)
            energy = sidelobe_energy(sequence)
            if counters.observe(sequence, energy, ctx.evals):
                done = True
                break
            if grad is not None:
                theta = optimizer.update(theta, grad)
        total_evals = ctx.evals
        if done:
            break
    if counters.best_sequence is None:
        raise RuntimeError("solver made no evaluations; increase the budget")
    best = canonicalize(counters.best_sequence)
    return SolveResult(
        solver="pce",
        n=N,
        seed=config.seed,
        best_sequence=best,
        best_energy=counters.best_energy,
        merit_factor=N * N / (2.0 * counters.best_energy),
        total_evals=total_evals,
        restarts_used=restarts_used,
        evals_to_exact=counters.evals_to_exact,
        evals_to_first=counters.evals_to_first,
        evals_to_second=counters.evals_to_second,
    )
