import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcelabs import _kernels
from pcelabs.labs_core import sidelobe_energy
from pcelabs.pauli_algebra import sample_anticommuting_set
from pcelabs.pce_solver import (
    EnergyReferences,
    LossContext,
    PceConfig,
    SolveResult,
    _CounterState,
    decode,
    parameter_shift_gradient,
    relax,
    relaxed_loss,
    relaxed_loss_gradient,
    solve,
)


def make_context(n=3, layers=2, N=8, alpha=4.5, beta=15.0, seed=0, **kw):
    rng = np.random.default_rng(seed)
    paulis = sample_anticommuting_set(n, N, rng)
    config = PceConfig(n_qubits=n, layers=layers, alpha=alpha, beta=beta)
    return LossContext(
        config.ansatz(), list(paulis), alpha, beta, rng=rng, **kw
    )


def test_relax_is_scaled_tanh():
    e = np.array([-0.5, 0.0, 0.25])
    np.testing.assert_allclose(relax(e, 2.0), np.tanh(2.0 * e))


def test_decode_signs_with_positive_tie():
    np.testing.assert_array_equal(
        decode(np.array([-0.3, 0.0, 0.7])), [-1, 1, 1]
    )


@given(st.lists(st.sampled_from([-1.0, 1.0]), min_size=3, max_size=20))
def test_relaxed_loss_on_spins_is_integer_energy(values):
    x = np.array(values)
    spins = x.astype(np.int8)
    assert relaxed_loss(x, beta=0.0) == pytest.approx(sidelobe_energy(spins))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 30.0))
@settings(max_examples=30)
def test_relaxed_loss_gradient_matches_finite_differences(seed, beta):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.99, 0.99, 11)
    grad = relaxed_loss_gradient(x, beta)
    eps = 1e-6
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += eps
        xm[i] -= eps
        fd = (relaxed_loss(xp, beta) - relaxed_loss(xm, beta)) / (2 * eps)
        assert grad[i] == pytest.approx(fd, rel=1e-4, abs=1e-5)


def test_parameter_shift_matches_finite_differences():
    ctx = make_context()
    theta = np.random.default_rng(3).uniform(-np.pi, np.pi, ctx.spec.param_count)
    analytic = parameter_shift_gradient(ctx, theta)
    eps = 1e-5
    for k in range(0, theta.size, 5):
        tp, tm = theta.copy(), theta.copy()
        tp[k] += eps
        tm[k] -= eps
        fd = (ctx.value(tp) - ctx.value(tm)) / (2 * eps)
        assert analytic[k] == pytest.approx(fd, abs=1e-5)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_adjoint_gradient_equals_parameter_shift():
    """The fast reverse-mode gradient must agree with the shift rule to
    numerical precision in exact simulation."""
    for seed in range(5):
        ctx_fast = make_context(seed=seed, engine="numba")
        ctx_ref = make_context(seed=seed, engine="numpy")
        theta = np.random.default_rng(100 + seed).uniform(
            -np.pi, np.pi, ctx_fast.spec.param_count
        )
        np.testing.assert_allclose(
            ctx_fast.gradient(theta),
            parameter_shift_gradient(ctx_ref, theta),
            atol=1e-10,
        )


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_engines_agree_on_expectations():
    ctx_fast = make_context(seed=7, engine="numba")
    ctx_ref = make_context(seed=7, engine="numpy")
    thetas = np.random.default_rng(11).uniform(-np.pi, np.pi, (4, ctx_fast.spec.param_count))
    np.testing.assert_allclose(
        ctx_fast.exact_expectations(thetas),
        ctx_ref.exact_expectations(thetas),
        atol=1e-12,
    )


def test_gradient_ignores_shot_noise():
    # finite shots perturb loss evaluation only; gradients stay exact
    noisy = make_context(seed=5, shots=32)
    clean = make_context(seed=5, shots=0)
    theta = np.random.default_rng(2).uniform(-np.pi, np.pi, noisy.spec.param_count)
    np.testing.assert_allclose(noisy.gradient(theta), clean.gradient(theta), atol=1e-12)


def test_eval_counting_defaults_to_loss_only():
    ctx = make_context()
    theta = np.zeros(ctx.spec.param_count)
    ctx.value_and_expectations(theta)
    assert ctx.evals == 1
    ctx.gradient(theta)
    assert ctx.evals == 1


def test_eval_counting_can_bill_gradients():
    ctx = make_context(count_gradient_evals=True)
    theta = np.zeros(ctx.spec.param_count)
    ctx.gradient(theta)
    assert ctx.evals == 2 * ctx.spec.param_count


def test_counters_record_first_crossing_only():
    refs = EnergyReferences(exact=6, first=14, second=18)
    c = _CounterState(13, refs)
    seq = np.ones(13, dtype=np.int8)
    assert not c.observe(seq, 30, 1)
    assert not c.observe(seq, 18, 2)
    assert c.evals_to_second == 2 and c.evals_to_first is None
    assert not c.observe(seq, 14, 3)
    assert c.evals_to_first == 3
    assert not c.observe(seq, 16, 4)
    assert c.evals_to_first == 3  # later crossings do not move it
    assert c.observe(seq, 6, 5)
    assert (c.evals_to_second, c.evals_to_first, c.evals_to_exact) == (2, 3, 5)


def test_counter_ordering_invariant():
    refs = EnergyReferences(exact=6, first=14, second=18)
    c = _CounterState(13, refs)
    seq = np.ones(13, dtype=np.int8)
    c.observe(seq, 5, 1)  # jumps straight past every level
    assert c.evals_to_second <= c.evals_to_first <= c.evals_to_exact


def test_counters_absent_without_references():
    c = _CounterState(13, None)
    seq = np.ones(13, dtype=np.int8)
    assert not c.observe(seq, 6, 1)
    assert c.evals_to_exact is None
    assert c.best_energy == 6


def test_interested_tracks_pending_levels():
    refs = EnergyReferences(exact=6, first=14, second=18)
    c = _CounterState(13, refs)
    seq = np.ones(13, dtype=np.int8)
    assert c.interested(100)  # anything beats an unset best
    c.observe(seq, 20, 1)
    assert not c.interested(25)
    assert c.interested(18)
    c.observe(seq, 18, 2)
    assert not c.interested(18)  # second already fired, not an improvement
    assert c.interested(14)


def test_solve_small_instance_end_to_end():
    config = PceConfig(seed=4, restart_cap=40)
    refs = EnergyReferences(exact=3, first=11, second=15)
    result = solve(7, config, refs)
    assert result.best_energy == 3
    assert result.evals_to_exact is not None
    assert result.evals_to_exact <= result.total_evals
    assert sidelobe_energy(result.best_sequence) == 3
    assert result.merit_factor == pytest.approx(49 / 6)
    assert result.evals_to_second <= result.evals_to_first <= result.evals_to_exact


def test_zero_iteration_restart_still_decodes_initial_point():
    config = PceConfig(seed=1, iters_per_restart=0, restart_cap=1)
    result = solve(13, config, references=None)
    assert result.total_evals == 1
    assert result.best_energy is not None
    assert result.evals_to_exact is None


def test_solve_is_deterministic():
    config = PceConfig(seed=12, restart_cap=5, iters_per_restart=50)
    a = solve(7, config, EnergyReferences(exact=3))
    b = solve(7, config, EnergyReferences(exact=3))
    assert a.to_dict() == b.to_dict()


def test_solve_result_round_trip():
    config = PceConfig(seed=12, restart_cap=5, iters_per_restart=50)
    result = solve(7, config, EnergyReferences(exact=3))
    again = SolveResult.from_dict(result.to_dict())
    assert again.to_dict() == result.to_dict()


def test_restart_budget_and_eval_accounting():
    iters = 30
    config = PceConfig(seed=9, iters_per_restart=iters, restart_cap=3)
    result = solve(9, config, references=None)
    # every restart costs iters + 1 evals when nothing stops it early
    assert result.total_evals == 3 * (iters + 1)
    assert result.restarts_used == 3


def test_config_validation():
    with pytest.raises(ValueError):
        PceConfig(n_qubits=1)
    with pytest.raises(ValueError):
        PceConfig(optimizer="newton")
    with pytest.raises(ValueError):
        PceConfig(pauli_mode="random")
    with pytest.raises(ValueError):
        PceConfig(restart_cap=0)
    with pytest.raises(ValueError):
        PceConfig(iters_per_restart=-1)


def test_alpha_defaults_to_scaled_qubit_count():
    assert PceConfig(n_qubits=4).resolved_alpha() == 6.0
    assert PceConfig(n_qubits=4, alpha=2.5).resolved_alpha() == 2.5


def test_shots_path_solves():
    config = PceConfig(seed=8, restart_cap=40, shots=256)
    result = solve(7, config, EnergyReferences(exact=3))
    assert result.best_energy == 3
