"""Dense statevector simulation of the brickwork ansatz.

Conventions, fixed once here and relied on everywhere:

* little-endian basis order: bit q of a basis index is qubit q, so the
  index c = sum_q c_q 2^q and qubit 0 toggles the lowest bit;
* rotations are RX(t) = exp(-i t X / 2), likewise RY and RZ;
* the entangler is the Molmer-Sorensen gate MS(t) = exp(-i t XX / 2),
  which mixes c with c XOR mask where mask covers both qubits;
* states are complex128 numpy arrays of shape (2^n,) or (B, 2^n).

One ansatz layer applies RX then RY on every qubit, then an MS gate on
each brick pair.  Even layers pair (0,1), (2,3), ...; odd layers pair
(1,2), (3,4), ... plus the wrap-around pair (n-1, 0) when n is even.
Every gate carries its own parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from pcelabs.pauli_algebra import PauliString

__all__ = [
    "AnsatzSpec",
    "GateProgram",
    "zero_state",
    "apply_rotation",
    "apply_ms",
    "apply_single_qubit",
    "run_ansatz",
    "run_ansatz_batch",
    "expectation",
    "expectations_batch",
    "sampled_expectation",
    "GATE_RX",
    "GATE_RY",
    "GATE_RZ",
    "GATE_MS",
]

GATE_RX, GATE_RY, GATE_RZ, GATE_MS = 0, 1, 2, 3

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_S_DAGGER = np.array([[1, 0], [0, -1j]], dtype=np.complex128)


class GateProgram(NamedTuple):
    """Flat gate list: kinds are GATE_* codes, args hold the qubit index
    for rotations and the two-qubit XOR mask for MS gates, params index
    into the parameter vector."""

    n: int
    kinds: np.ndarray
    args: np.ndarray
    params: np.ndarray
    param_count: int


@dataclass(frozen=True)
class AnsatzSpec:
    """Brickwork circuit shape: qubit count and layer count."""

    n: int
    layers: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ansatz needs at least 2 qubits")
        if self.layers < 1:
            raise ValueError("ansatz needs at least 1 layer")

    def brick_pairs(self, layer: int) -> list[tuple[int, int]]:
        n = self.n
        if layer % 2 == 0:
            return [(q, q + 1) for q in range(0, n - 1, 2)]
        pairs = [(q, q + 1) for q in range(1, n - 1, 2)]
        if n % 2 == 0:
            pairs.append((n - 1, 0))
        return pairs

    @property
    def params_per_layer(self) -> int:
        per = [2 * self.n + len(self.brick_pairs(layer)) for layer in (0, 1)]
        return per[0] if per[0] == per[1] else -1

    @property
    def param_count(self) -> int:
        return sum(
            2 * self.n + len(self.brick_pairs(layer)) for layer in range(self.layers)
        )

    def gate_program(self) -> GateProgram:
        return _build_program(self.n, self.layers)


@lru_cache(maxsize=64)
def _build_program(n: int, layers: int) -> GateProgram:
    spec = AnsatzSpec(n, layers)
    kinds, args, params = [], [], []
    next_param = 0
    for layer in range(layers):
        for kind in (GATE_RX, GATE_RY):
            for q in range(n):
                kinds.append(kind)
                args.append(q)
                params.append(next_param)
                next_param += 1
        for q1, q2 in spec.brick_pairs(layer):
            kinds.append(GATE_MS)
            args.append((1 << q1) | (1 << q2))
            params.append(next_param)
            next_param += 1
    return GateProgram(
        n=n,
        kinds=np.array(kinds, dtype=np.int8),
        args=np.array(args, dtype=np.int64),
        params=np.array(params, dtype=np.int64),
        param_count=next_param,
    )


def zero_state(n: int, batch: int | None = None) -> np.ndarray:
    """|0...0> as a statevector, or a batch of them."""
    dim = 1 << n
    if batch is None:
        psi = np.zeros(dim, dtype=np.complex128)
        psi[0] = 1.0
    else:
        psi = np.zeros((batch, dim), dtype=np.complex128)
        psi[:, 0] = 1.0
    return psi


def _as_batch(state: np.ndarray) -> tuple[np.ndarray, bool]:
    if state.ndim == 1:
        return state[None, :], True
    return state, False


def _mix_pair(states: np.ndarray, qubit: int, m00, m01, m10, m11) -> None:
    """Apply a 2x2 matrix to one qubit of a (B, 2^n) array, in place.

    Matrix entries may be scalars or (B,) arrays for per-row angles.
    """
    b, dim = states.shape
    lo = 1 << qubit
    hi = dim >> (qubit + 1)
    view = states.reshape(b, hi, 2, lo)
    shape = (-1, 1, 1)
    if np.ndim(m00):
        m00 = np.reshape(m00, shape)
        m11 = np.reshape(m11, shape)
    if np.ndim(m01):
        m01 = np.reshape(m01, shape)
        m10 = np.reshape(m10, shape)
    v0 = view[:, :, 0, :].copy()
    v1 = view[:, :, 1, :]
    view[:, :, 0, :] = m00 * v0 + m01 * v1
    view[:, :, 1, :] = m10 * v0 + m11 * v1


def _rotate_inplace(states: np.ndarray, axis: int, qubit: int, theta) -> None:
    half = np.asarray(theta) / 2.0
    c = np.cos(half)
    s = np.sin(half)
    if axis == GATE_RX:
        _mix_pair(states, qubit, c, -1j * s, -1j * s, c)
    elif axis == GATE_RY:
        _mix_pair(states, qubit, c, -s, s, c)
    elif axis == GATE_RZ:
        _mix_pair(states, qubit, c - 1j * s, 0.0, 0.0, c + 1j * s)
    else:
        raise ValueError(f"unknown rotation axis {axis}")


def _ms_inplace(states: np.ndarray, mask: int, theta) -> None:
    half = np.asarray(theta) / 2.0
    c = np.cos(half)
    s = np.sin(half)
    if np.ndim(c):
        c = c[:, None]
        s = s[:, None]
    perm = np.arange(states.shape[1]) ^ mask
    swapped = states[:, perm]
    states *= c
    states -= 1j * s * swapped


_AXIS_CODES = {"X": GATE_RX, "Y": GATE_RY, "Z": GATE_RZ}


def apply_rotation(state: np.ndarray, axis: str, qubit: int, theta: float) -> np.ndarray:
    """exp(-i theta P_q / 2) applied to a state; returns a new array."""
    out, single = _as_batch(np.array(state, dtype=np.complex128))
    _rotate_inplace(out, _AXIS_CODES[axis.upper()], qubit, theta)
    return out[0] if single else out


def apply_ms(state: np.ndarray, q1: int, q2: int, theta: float) -> np.ndarray:
    """exp(-i theta X_q1 X_q2 / 2) applied to a state; returns a new array."""
    if q1 == q2:
        raise ValueError("MS gate needs two distinct qubits")
    out, single = _as_batch(np.array(state, dtype=np.complex128))
    _ms_inplace(out, (1 << q1) | (1 << q2), theta)
    return out[0] if single else out


def apply_single_qubit(state: np.ndarray, mat: np.ndarray, qubit: int) -> np.ndarray:
    """Apply an arbitrary 2x2 matrix to one qubit; returns a new array."""
    out, single = _as_batch(np.array(state, dtype=np.complex128))
    _mix_pair(out, qubit, mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1])
    return out[0] if single else out


def run_ansatz_batch(spec: AnsatzSpec, thetas: np.ndarray) -> np.ndarray:
    """Run the brickwork circuit for each row of a (B, P) angle matrix.

    Returns a (B, 2^n) array of statevectors.  All rows share the gate
    sequence; only the angles differ, which is what the parameter-shift
    rule needs.
    """
    prog = spec.gate_program()
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    if thetas.shape[1] != prog.param_count:
        raise ValueError(
            f"expected {prog.param_count} parameters, got {thetas.shape[1]}"
        )
    states = zero_state(spec.n, batch=thetas.shape[0])
    for kind, arg, param in zip(prog.kinds, prog.args, prog.params):
        angles = thetas[:, param]
        if kind == GATE_MS:
            _ms_inplace(states, int(arg), angles)
        else:
            _rotate_inplace(states, int(kind), int(arg), angles)
    norms = np.linalg.norm(states, axis=1)
    if not np.allclose(norms, 1.0, atol=1e-9):
        raise AssertionError("state norm drifted beyond 1e-9")
    return states


def run_ansatz(spec: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    """Single-parameter-vector version of ``run_ansatz_batch``."""
    return run_ansatz_batch(spec, np.asarray(theta)[None, :])[0]


def _pauli_tables(pauli: PauliString, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and coefficient so that (P psi)[c] = coeff[c] psi[perm[c]]."""
    idx = np.arange(dim)
    perm = idx ^ pauli.x_mask
    signs = 1.0 - 2.0 * (np.bitwise_count((perm & pauli.z_mask).astype(np.uint64)) & 1)
    phase = 1j ** (pauli.y_count() % 4)
    return perm, phase * signs


def expectation(state: np.ndarray, pauli: PauliString) -> float:
    """<psi|P|psi> for a normalized state; checked real to 1e-9."""
    dim = 1 << pauli.n
    if state.shape != (dim,):
        raise ValueError(f"state shape {state.shape} does not match {pauli.n} qubits")
    perm, coeff = _pauli_tables(pauli, dim)
    value = np.vdot(state, coeff * state[perm])
    if abs(value.imag) >= 1e-9:
        raise AssertionError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def expectations_batch(states: np.ndarray, paulis) -> np.ndarray:
    """<psi_b|P_i|psi_b> for every state row and Pauli; shape (B, N)."""
    states = np.atleast_2d(states)
    dim = states.shape[1]
    out = np.empty((states.shape[0], len(paulis)), dtype=np.float64)
    conj = states.conj()
    for i, pauli in enumerate(paulis):
        perm, coeff = _pauli_tables(pauli, dim)
        value = np.einsum("bc,bc->b", conj, coeff * states[:, perm])
        if np.abs(value.imag).max() >= 1e-9:
            raise AssertionError("expectation has imaginary part above 1e-9")
        out[:, i] = value.real
    return out


def sampled_expectation(
    state: np.ndarray, pauli: PauliString, shots: int, rng: np.random.Generator
) -> float:
    """Estimate <psi|P|psi> from a finite number of measured shots.

    Rotates each support qubit into the Z eigenbasis (H for X, then
    S-dagger followed by H for Y), reads the parity distribution, and
    draws a binomial sample.  shots = 0 would divide by zero and is
    rejected.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    rotated = np.array(state, dtype=np.complex128)
    for q in range(pauli.n):
        xb = (pauli.x_mask >> q) & 1
        zb = (pauli.z_mask >> q) & 1
        if xb and zb:
            rotated = apply_single_qubit(rotated, _S_DAGGER, q)
            rotated = apply_single_qubit(rotated, _HADAMARD, q)
        elif xb:
            rotated = apply_single_qubit(rotated, _HADAMARD, q)
    support = pauli.x_mask | pauli.z_mask
    probs = np.abs(rotated) ** 2
    parity = np.bitwise_count((np.arange(probs.size) & support).astype(np.uint64)) & 1
    p_plus = float(probs[parity == 0].sum())
    p_plus = min(max(p_plus, 0.0), 1.0)
    hits = int(rng.binomial(shots, p_plus))
    return (2 * hits - shots) / shots
