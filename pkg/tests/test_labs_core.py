import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcelabs.labs_core import (
    MIN_LENGTH,
    FlipWorkspace,
    autocorrelations,
    canonicalize,
    energy_report,
    expand_skew_symmetric,
    format_sequence,
    merit_factor,
    parse_sequence,
    sidelobe_energy,
    symmetry_images,
)

BARKER_13 = parse_sequence("+++++--++-+-+")


def spins(min_size=MIN_LENGTH, max_size=24):
    return st.lists(
        st.sampled_from([-1, 1]), min_size=min_size, max_size=max_size
    ).map(lambda v: np.array(v, dtype=np.int8))


def naive_autocorrelations(x):
    n = len(x)
    return [sum(int(x[i]) * int(x[i + lag]) for i in range(n - lag)) for lag in range(1, n)]


def test_barker_13_energy_and_merit():
    assert sidelobe_energy(BARKER_13) == 6
    assert merit_factor(BARKER_13) == pytest.approx(169 / 12)


def test_barker_13_sidelobes_alternate():
    c = autocorrelations(BARKER_13)
    assert np.all(np.abs(c) <= 1)
    assert int(np.sum(c * c)) == 6


@given(spins())
def test_autocorrelations_match_naive_sum(x):
    np.testing.assert_array_equal(autocorrelations(x), naive_autocorrelations(x))


@given(spins())
def test_energy_is_sum_of_squared_sidelobes(x):
    c = naive_autocorrelations(x)
    assert sidelobe_energy(x) == sum(v * v for v in c)


@given(spins())
def test_merit_factor_identity(x):
    e = sidelobe_energy(x)
    assert merit_factor(x) == pytest.approx(len(x) ** 2 / (2 * e) if e else np.inf)


def test_energy_report_fields():
    report = energy_report(BARKER_13)
    assert report["n"] == 13
    assert report["energy"] == 6
    assert report["autocorrelations"] == naive_autocorrelations(BARKER_13)


@given(spins(max_size=16), st.data())
def test_flip_delta_matches_recomputation(x, data):
    i = data.draw(st.integers(0, x.size - 1))
    ws = FlipWorkspace(x)
    flipped = x.copy()
    flipped[i] = -flipped[i]
    assert ws.propose(i) == sidelobe_energy(flipped) - sidelobe_energy(x)


@given(spins(max_size=16))
def test_propose_all_matches_single_proposals(x):
    ws = FlipWorkspace(x)
    np.testing.assert_array_equal(
        ws.propose_all(), [ws.propose(i) for i in range(x.size)]
    )


@given(spins(max_size=16), st.lists(st.integers(0, 1000), min_size=1, max_size=30))
def test_commit_keeps_energy_consistent(x, moves):
    ws = FlipWorkspace(x)
    for raw in moves:
        i = raw % x.size
        before = ws.energy
        delta = ws.propose(i)
        ws.commit(i)
        assert ws.energy == before + delta
        assert ws.energy == sidelobe_energy(ws.sequence)
    np.testing.assert_array_equal(
        autocorrelations(ws.sequence), naive_autocorrelations(ws.sequence)
    )


def test_symmetry_images_preserve_energy():
    images = symmetry_images(BARKER_13)
    assert len(images) == 8
    for image in images:
        assert sidelobe_energy(image) == 6


@given(spins())
def test_canonicalize_collapses_symmetry_orbit(x):
    canon = canonicalize(x)
    for image in symmetry_images(x):
        np.testing.assert_array_equal(canonicalize(image), canon)


@given(spins())
def test_canonical_form_is_idempotent_member(x):
    canon = canonicalize(x)
    assert any(np.array_equal(canon, img) for img in symmetry_images(x))
    np.testing.assert_array_equal(canonicalize(canon), canon)


@given(st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=16))
def test_skew_expansion_symmetry(half_list):
    half = np.array(half_list, dtype=np.int8)
    full = expand_skew_symmetric(half)
    m = half.size
    assert full.size == 2 * m - 1
    np.testing.assert_array_equal(full[:m], half)
    for offset in range(1, m):
        assert full[m - 1 + offset] == (-1) ** offset * full[m - 1 - offset]


def test_skew_expansion_reaches_barker_13():
    # the optimal N=13 sequence is skew-symmetric
    half = BARKER_13[:7]
    np.testing.assert_array_equal(expand_skew_symmetric(half), BARKER_13)


def test_parse_accepts_sign_and_bit_alphabets():
    np.testing.assert_array_equal(parse_sequence("++-"), [1, 1, -1])
    np.testing.assert_array_equal(parse_sequence("110"), [1, 1, -1])


def test_format_parse_round_trip():
    assert parse_sequence(format_sequence(BARKER_13)).tolist() == BARKER_13.tolist()


def test_parse_rejects_junk():
    with pytest.raises(ValueError):
        parse_sequence("+x-")


def test_too_short_sequences_rejected():
    with pytest.raises(ValueError):
        sidelobe_energy(np.array([1, -1], dtype=np.int8))


def test_non_spin_values_rejected():
    with pytest.raises(ValueError):
        sidelobe_energy(np.array([1, 0, -1, 1], dtype=np.int8))
