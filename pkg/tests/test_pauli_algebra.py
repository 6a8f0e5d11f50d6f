import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcelabs.pauli_algebra import (
    PauliSet,
    PauliString,
    SetSamplingError,
    commutes,
    max_anticommuting_size,
    mub_partition,
    sample_anticommuting_set,
    sample_commuting_set,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense(p: PauliString) -> np.ndarray:
    # leftmost label symbol is qubit 0, the least significant index bit
    out = np.array([[1.0 + 0j]])
    for ch in p.to_label():
        out = np.kron(SINGLE[ch], out)
    return out


def labels(n, min_weight=1):
    alphabet = st.sampled_from("IXYZ")
    return st.lists(alphabet, min_size=n, max_size=n).map("".join).filter(
        lambda s: sum(c != "I" for c in s) >= min_weight
    )


@given(labels(3))
def test_label_round_trip(label):
    assert PauliString.from_label(label).to_label() == label


def test_identity_rejected():
    with pytest.raises(ValueError):
        PauliString.from_label("III")


def test_weight_and_y_count():
    p = PauliString.from_label("XYZIY")
    assert p.weight() == 4
    assert p.y_count() == 2


@given(labels(3), labels(3))
def test_commutes_matches_dense_matrices(la, lb):
    p, q = PauliString.from_label(la), PauliString.from_label(lb)
    bracket = dense(p) @ dense(q) - dense(q) @ dense(p)
    assert commutes(p, q) == bool(np.allclose(bracket, 0))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_mub_partition_properties(n):
    """2^n + 1 classes of 2^n - 1 mutually commuting strings that
    together cover every nonidentity string exactly once."""
    classes = mub_partition(n)
    assert len(classes) == 2**n + 1
    seen = set()
    for cls in classes:
        assert len(cls) == 2**n - 1
        members = list(cls)
        for i, p in enumerate(members):
            for q in members[i + 1 :]:
                assert commutes(p, q)
        seen.update((p.x_mask, p.z_mask) for p in members)
    assert len(seen) == 4**n - 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_mub_classes_are_closed_under_products(n):
    # each class with identity forms a group: product of two members
    # lands back in the class
    for cls in mub_partition(n):
        codes = {(p.x_mask, p.z_mask) for p in cls}
        members = list(cls)
        for p in members:
            for q in members:
                prod = (p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask)
                if prod != (0, 0):
                    assert prod in codes


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_anticommuting_reaches_cap(n, rng):
    cap = max_anticommuting_size(n)
    assert cap == 2 * n + 1
    s = sample_anticommuting_set(n, cap, rng)
    assert s.strict_count == cap
    for i in range(cap):
        for j in range(i + 1, cap):
            assert not commutes(s[i], s[j])


@pytest.mark.parametrize("n", [2, 3])
def test_anticommuting_beyond_cap_fills_with_fallback(n, rng):
    count = 2 * n + 4
    s = sample_anticommuting_set(n, count, rng)
    assert len(s) == count
    assert s.strict_count == 2 * n + 1
    strict = s.paulis[: s.strict_count]
    for i, p in enumerate(strict):
        for q in strict[i + 1 :]:
            assert not commutes(p, q)


def test_commuting_strict_cap(rng):
    n = 3
    s = sample_commuting_set(n, 2**n - 1, rng)
    assert s.strict_count == 2**n - 1
    for i, p in enumerate(s.paulis):
        for q in s.paulis[i + 1 :]:
            assert commutes(p, q)


def test_commuting_overflow_uses_fallback(rng):
    n = 2
    s = sample_commuting_set(n, 6, rng)
    assert len(s) == 6
    assert s.strict_count == 3


def test_sampling_is_deterministic_per_seed():
    a = sample_anticommuting_set(4, 13, np.random.default_rng(5))
    b = sample_anticommuting_set(4, 13, np.random.default_rng(5))
    assert [p.to_label() for p in a] == [p.to_label() for p in b]


def test_distinct_seeds_usually_differ():
    a = sample_anticommuting_set(4, 13, np.random.default_rng(1))
    b = sample_anticommuting_set(4, 13, np.random.default_rng(2))
    assert [p.to_label() for p in a] != [p.to_label() for p in b]


def test_set_round_trip(rng):
    s = sample_anticommuting_set(3, 7, rng)
    again = PauliSet.from_dict(s.to_dict())
    assert [p.to_label() for p in again] == [p.to_label() for p in s]
    assert again.strict_count == s.strict_count


def test_mask_arrays_match_members(rng):
    s = sample_commuting_set(3, 5, rng)
    xs, zs = s.mask_arrays()
    assert xs.tolist() == [p.x_mask for p in s]
    assert zs.tolist() == [p.z_mask for p in s]


def test_count_validation(rng):
    with pytest.raises(ValueError):
        sample_anticommuting_set(3, 0, rng)
    with pytest.raises(ValueError):
        sample_commuting_set(0, 1, rng)
