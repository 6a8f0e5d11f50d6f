"""Jitted hot loops for the variational solver.

Numba compilations of the statevector evolution, Pauli expectation, and
reverse-mode (adjoint) gradient sweep.  Everything here mirrors a pure
numpy implementation in ``pce_solver``; tests pin the two against each
other, and the solver falls back to numpy when numba is unavailable.

Gate encoding matches ``state_sim.GateProgram``: kind 0 = RX, 1 = RY,
2 = RZ, 3 = MS, args hold the qubit for rotations and the XOR mask for
MS gates.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def evolve_batch(kinds, args, params, thetas, n):
    """Evolve |0..0> through the gate program for each row of angles."""
    batch = thetas.shape[0]
    dim = 1 << n
    out = np.zeros((batch, dim), dtype=np.complex128)
    for b in range(batch):
        psi = out[b]
        psi[0] = 1.0
        for g in range(kinds.size):
            half = 0.5 * thetas[b, params[g]]
            c = np.cos(half)
            s = np.sin(half)
            kind = kinds[g]
            if kind == 3:
                mask = args[g]
                for i in range(dim):
                    j = i ^ mask
                    if i < j:
                        a0 = psi[i]
                        a1 = psi[j]
                        psi[i] = c * a0 - 1j * s * a1
                        psi[j] = c * a1 - 1j * s * a0
            else:
                lo = 1 << args[g]
                step = lo << 1
                for base in range(0, dim, step):
                    for off in range(lo):
                        i0 = base + off
                        i1 = i0 + lo
                        a0 = psi[i0]
                        a1 = psi[i1]
                        if kind == 0:
                            psi[i0] = c * a0 - 1j * s * a1
                            psi[i1] = c * a1 - 1j * s * a0
                        elif kind == 1:
                            psi[i0] = c * a0 - s * a1
                            psi[i1] = s * a0 + c * a1
                        else:
                            psi[i0] = (c - 1j * s) * a0
                            psi[i1] = (c + 1j * s) * a1
    return out


@njit(cache=True)
def pauli_expectations(states, perms, coeffs):
    """Real expectation of each tabulated Pauli for each state row.

    perms[i, c] and coeffs[i, c] encode (P_i psi)[c] = coeffs * psi[perm];
    only the real part of the quadratic form is accumulated, which equals
    the full Hermitian expectation.
    """
    batch, dim = states.shape
    count = perms.shape[0]
    out = np.empty((batch, count), dtype=np.float64)
    for b in range(batch):
        psi = states[b]
        for i in range(count):
            acc = 0.0
            for c in range(dim):
                term = np.conj(psi[c]) * coeffs[i, c] * psi[perms[i, c]]
                acc += term.real
            out[b, i] = acc
    return out


@njit(cache=True)
def adjoint_gradient(kinds, args, params, theta, n, perms, coeffs, weights, psi_final):
    """d(sum_i weights_i <P_i>)/d(theta) via one reverse sweep.

    psi_final must be the circuit output for theta.  The sweep keeps two
    vectors: psi, walked backwards through the inverse gates, and
    lam = sum_i weights_i P_i psi_final, walked backwards alongside.  The
    derivative of gate g with generator H_g is Im(<lam|H_g|psi>) taken
    after both vectors sit just past gate g.  Matches the parameter-shift
    value exactly in exact simulation.
    """
    dim = 1 << n
    count = perms.shape[0]
    lam = np.zeros(dim, dtype=np.complex128)
    for i in range(count):
        w = weights[i]
        if w != 0.0:
            for c in range(dim):
                lam[c] += w * coeffs[i, c] * psi_final[perms[i, c]]
    psi = psi_final.copy()
    grad = np.zeros(theta.size, dtype=np.float64)
    for g in range(kinds.size - 1, -1, -1):
        kind = kinds[g]
        acc = 0.0 + 0.0j
        if kind == 3:
            mask = args[g]
            for i in range(dim):
                j = i ^ mask
                if i < j:
                    acc += np.conj(lam[i]) * psi[j] + np.conj(lam[j]) * psi[i]
        else:
            lo = 1 << args[g]
            step = lo << 1
            if kind == 0:
                for base in range(0, dim, step):
                    for off in range(lo):
                        i0 = base + off
                        i1 = i0 + lo
                        acc += np.conj(lam[i0]) * psi[i1] + np.conj(lam[i1]) * psi[i0]
            elif kind == 1:
                for base in range(0, dim, step):
                    for off in range(lo):
                        i0 = base + off
                        i1 = i0 + lo
                        acc += 1j * (
                            np.conj(lam[i1]) * psi[i0] - np.conj(lam[i0]) * psi[i1]
                        )
            else:
                for base in range(0, dim, step):
                    for off in range(lo):
                        i0 = base + off
                        i1 = i0 + lo
                        acc += np.conj(lam[i0]) * psi[i0] - np.conj(lam[i1]) * psi[i1]
        grad[params[g]] += acc.imag
        # Un-apply gate g from both vectors (rotate by -theta).
        half = 0.5 * theta[params[g]]
        c = np.cos(half)
        s = -np.sin(half)
        if kind == 3:
            mask = args[g]
            for i in range(dim):
                j = i ^ mask
                if i < j:
                    p0 = psi[i]
                    p1 = psi[j]
                    psi[i] = c * p0 - 1j * s * p1
                    psi[j] = c * p1 - 1j * s * p0
                    l0 = lam[i]
                    l1 = lam[j]
                    lam[i] = c * l0 - 1j * s * l1
                    lam[j] = c * l1 - 1j * s * l0
        else:
            lo = 1 << args[g]
            step = lo << 1
            for base in range(0, dim, step):
                for off in range(lo):
                    i0 = base + off
                    i1 = i0 + lo
                    p0 = psi[i0]
                    p1 = psi[i1]
                    l0 = lam[i0]
                    l1 = lam[i1]
                    if kind == 0:
                        psi[i0] = c * p0 - 1j * s * p1
                        psi[i1] = c * p1 - 1j * s * p0
                        lam[i0] = c * l0 - 1j * s * l1
                        lam[i1] = c * l1 - 1j * s * l0
                    elif kind == 1:
                        psi[i0] = c * p0 - s * p1
                        psi[i1] = s * p0 + c * p1
                        lam[i0] = c * l0 - s * l1
                        lam[i1] = s * l0 + c * l1
                    else:
                        psi[i0] = (c - 1j * s) * p0
                        psi[i1] = (c + 1j * s) * p1
                        lam[i0] = (c - 1j * s) * l0
                        lam[i1] = (c + 1j * s) * l1
    return grad
