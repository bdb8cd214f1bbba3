import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmwitness.dynamics import IDENTITY, PAULIS, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, RANDOM_FIELD_MAP
from nmwitness.errors import InvariantError, ParameterError, SingularityError
from nmwitness.generators import (
    PAULI_BASIS,
    Generator,
    ach_operators_analytic,
    ach_rates_analytic,
    action_from_ketbra_coefficients,
    canonical_decompose,
    dissipator,
    generator_dissipative,
    generator_nondissipative,
    hamiltonian_action,
    ketbra_coefficients,
    nearest_singular_point,
    reconstruct_generator_from_map,
    transfer_matrix,
    transfer_matrix_derivative,
)
from nmwitness.linalg import vectorize

from conftest import random_hermitian, random_state

DIAG_EXCITED = np.diag([1.0, 0.0]).astype(complex)
DIAG_GROUND = np.diag([0.0, 1.0]).astype(complex)


def direct_action(tau, gamma, rho):
    t = np.tan(2 * tau)
    out = t * (SIGMA_Y @ rho @ SIGMA_Y - rho)
    n = SIGMA_PLUS @ SIGMA_MINUS
    return out + gamma * (SIGMA_MINUS @ rho @ SIGMA_PLUS - 0.5 * (n @ rho + rho @ n))


def regular_taus(n, seed=0, hi=np.pi):
    taus = np.random.default_rng(seed).uniform(0.0, hi, 4 * n)
    keep = [t for t in taus if abs(t - nearest_singular_point(t)) > 2e-3]
    return keep[:n]


# -- closed forms ----------------------------------------------------------------


def test_nondissipative_zero_at_origin():
    np.testing.assert_array_equal(generator_nondissipative(0.0).action, np.zeros((4, 4)))


@pytest.mark.parametrize("tau, expected", [(np.pi / 8, [-1, 1]), (3 * np.pi / 8, [1, -1])])
def test_nondissipative_examples(tau, expected):
    np.testing.assert_allclose(generator_nondissipative(tau)(DIAG_EXCITED), np.diag(expected), atol=1e-14)


def test_singular_window():
    with pytest.raises(SingularityError) as err:
        generator_nondissipative(np.pi / 4 + 5e-4)
    assert err.value.tau_singular == pytest.approx(np.pi / 4)
    with pytest.raises(SingularityError) as err:
        generator_dissipative(3 * np.pi / 4 - 1e-4, 1.0)
    assert err.value.tau_singular == pytest.approx(3 * np.pi / 4)
    generator_nondissipative(np.pi / 4 + 2e-3)


def test_dissipative_examples():
    gamma = 2.5
    np.testing.assert_allclose(
        generator_dissipative(0.0, gamma)(DIAG_EXCITED), gamma * np.diag([-1, 1]), atol=1e-14
    )
    np.testing.assert_allclose(generator_dissipative(0.0, gamma)(DIAG_GROUND), np.zeros((2, 2)), atol=1e-14)
    np.testing.assert_allclose(generator_dissipative(np.pi / 8, 3.0)(DIAG_EXCITED), np.diag([-4, 4]), atol=1e-13)


def test_negative_decay_rate_rejected():
    with pytest.raises(ParameterError):
        generator_dissipative(0.1, -1.0)


@pytest.mark.parametrize("gamma", [0.0, 0.7, 3.0])
def test_actions_match_direct_formula(rng, gamma):
    for tau in regular_taus(10, seed=int(gamma * 10)):
        gen = generator_dissipative(tau, gamma)
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        np.testing.assert_allclose(gen(x), direct_action(tau, gamma, x), atol=1e-10 * max(1, abs(np.tan(2 * tau))))


@pytest.mark.parametrize("gamma", [0.0, 1.0, 10.0])
def test_generator_invariants(rng, gamma):
    for tau in regular_taus(10):
        gen = generator_dissipative(tau, gamma).check()
        rho = random_state(rng)
        assert abs(np.trace(gen(rho))) <= 1e-10
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.max(np.abs(gen(x).conj().T - gen(x.conj().T))) <= 1e-10


def test_check_rejects_non_trace_preserving():
    with pytest.raises(InvariantError):
        Generator(np.eye(4)).check()


# -- reconstruction from the map -------------------------------------------------


def test_reconstruction_at_origin():
    mats, gen = reconstruct_generator_from_map(RANDOM_FIELD_MAP, 0.0)
    np.testing.assert_allclose(mats.F, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(mats.R, np.zeros((4, 4)), atol=1e-15)
    np.testing.assert_allclose(gen.action, np.zeros((4, 4)), atol=1e-15)


def test_reconstruction_matrices_at_pi_over_8():
    mats, _ = reconstruct_generator_from_map(RANDOM_FIELD_MAP, np.pi / 8)
    np.testing.assert_allclose(mats.F, np.diag([1, R2 := np.sqrt(2) / 2, 1, R2]), atol=1e-12)
    # tan(pi/4) = 1
    expected_r = np.array([[-1, -1, 0, 0], [-1, -1, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]])
    np.testing.assert_allclose(mats.R, expected_r, atol=1e-10)


@pytest.mark.parametrize("tau", regular_taus(20, seed=5))
def test_transfer_matrix_is_diagonal_cosine(tau):
    mats, _ = reconstruct_generator_from_map(RANDOM_FIELD_MAP, tau)
    c = np.cos(2 * tau)
    np.testing.assert_allclose(mats.F, np.diag([1, c, 1, c]), atol=1e-12)
    t = np.tan(2 * tau)
    expected_r = t * np.array([[-1, -1, 0, 0], [-1, -1, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]])
    np.testing.assert_allclose(mats.R, expected_r, atol=1e-10 * max(1, abs(t)))


def test_transfer_derivative_central_difference():
    h = 1e-6
    for tau in (0.1, 0.5, 1.0, 2.2):
        fd = (transfer_matrix(tau + h) - transfer_matrix(tau - h)) / (2 * h)
        np.testing.assert_allclose(transfer_matrix_derivative(tau), fd, atol=1e-6)


def test_reconstruction_equivalence_random_times():
    rng = np.random.default_rng(11)
    taus = np.concatenate([rng.uniform(0, np.pi / 4, 25), rng.uniform(np.pi / 4 + 1e-3, np.pi / 2, 25)])
    for tau in taus:
        if abs(np.cos(2 * tau)) <= 1e-3:
            continue
        _, gen = reconstruct_generator_from_map(RANDOM_FIELD_MAP, tau)
        assert np.max(np.abs(gen.action - generator_nondissipative(tau, delta=0).action)) <= 1e-8


def test_reconstruction_singular_transfer_matrix():
    with pytest.raises(SingularityError):
        reconstruct_generator_from_map(RANDOM_FIELD_MAP, np.pi / 4)


def test_ketbra_coefficients_for_nonsymmetric_rates(rng):
    # L(X) = sum_rs M_rs G_r Tr[G_s X] for a generic real M
    m = rng.normal(size=(4, 4))
    action = action_from_ketbra_coefficients(ketbra_coefficients(m))
    for _ in range(5):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        direct = sum(m[r, s] * gr * np.trace(gs @ x) for r, gr in enumerate(PAULI_BASIS) for s, gs in enumerate(PAULI_BASIS))
        np.testing.assert_allclose(action @ vectorize(x), vectorize(direct), atol=1e-12)


# -- canonical form -----------------------------------------------------------------


def same_channel(op_a, op_b, tol=1e-10):
    return np.max(np.abs(dissipator(op_a) - dissipator(op_b))) <= tol


def test_canonical_nondissipative_single_channel():
    form = canonical_decompose(generator_nondissipative(np.pi / 8))
    np.testing.assert_allclose(form.rates, [2, 0, 0], atol=1e-12)
    assert same_channel(form.operators[0], SIGMA_Y / np.sqrt(2))


def test_canonical_rates_three_pi_over_eight():
    form = canonical_decompose(generator_dissipative(3 * np.pi / 8, 3.0))
    np.testing.assert_allclose(
        form.rates, [(1 + np.sqrt(13)) / 2, 0.0, (1 - np.sqrt(13)) / 2], atol=1e-12
    )
    assert form.rates[0] == pytest.approx(2.3027756, abs=1e-7)
    assert form.rates[-1] == pytest.approx(-1.3027756, abs=1e-7)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 3.0])
def test_canonical_rates_match_closed_form(gamma):
    for tau in regular_taus(30, seed=3):
        form = canonical_decompose(generator_dissipative(tau, gamma))
        plus, minus = ach_rates_analytic(tau, gamma)
        np.testing.assert_allclose(form.rates, sorted([plus, minus, 0.0], reverse=True), atol=1e-9)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 3.0])
def test_canonical_form_properties(gamma):
    basis = [np.eye(2), np.diag([0, 1]), 0.5 * (IDENTITY + SIGMA_X), 0.5 * (IDENTITY + SIGMA_Y)]
    for tau in regular_taus(15, seed=7):
        gen = generator_dissipative(tau, gamma)
        form = canonical_decompose(gen)
        for rho in basis:
            assert np.max(np.abs((form.action() @ vectorize(rho)) - gen.action @ vectorize(rho))) <= 1e-9
        gram = np.array([[np.trace(a.conj().T @ b) for b in form.operators] for a in form.operators])
        assert np.max(np.abs(gram - np.eye(3))) <= 1e-10
        assert all(abs(np.trace(op)) <= 1e-12 for op in form.operators)
        assert abs(form.rates.sum() - np.trace(form.kossakowski).real) <= 1e-10
        np.testing.assert_allclose(form.hamiltonian, 0, atol=1e-10 * max(1, abs(np.tan(2 * tau))))


def test_canonical_recovers_random_gks_generator(rng):
    for _ in range(10):
        h = random_hermitian(rng, 2)
        a = random_hermitian(rng, 3)
        ops = [p / np.sqrt(2) for p in PAULIS[1:]]
        action = hamiltonian_action(h)
        for i in range(3):
            for j in range(3):
                fi, fj = ops[i], ops[j]
                n = fj.conj().T @ fi
                action = action + a[i, j] * (
                    np.kron(fj.conj(), fi) - 0.5 * (np.kron(np.eye(2), n) + np.kron(n.T, np.eye(2)))
                )
        form = canonical_decompose(Generator(action))
        np.testing.assert_allclose(form.rates, np.linalg.eigvalsh(a)[::-1], atol=1e-10)
        traceless_h = h - np.trace(h) / 2 * np.eye(2)
        np.testing.assert_allclose(form.hamiltonian, traceless_h, atol=1e-10)
        np.testing.assert_allclose(form.action(), action, atol=1e-10)


def test_canonical_rejects_non_trace_preserving():
    with pytest.raises(InvariantError):
        canonical_decompose(Generator(np.eye(4) * 0.3))


# -- closed-form rates and operators ----------------------------------------------


def test_ach_rates_example():
    plus, minus = ach_rates_analytic(3 * np.pi / 8, 3.0)
    assert plus == pytest.approx(2.302776, abs=1e-6)
    assert minus == pytest.approx(-1.302776, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0, 3.0, 10.0])
def test_ach_rate_identities(gamma):
    for tau in regular_taus(40, seed=9):
        plus, minus = ach_rates_analytic(tau, gamma)
        t = np.tan(2 * tau)
        assert plus + minus == pytest.approx(gamma + 2 * t, abs=1e-9)
        assert plus * minus == pytest.approx(gamma * t, abs=1e-9 * max(1, t * t))
        assert minus <= plus


@pytest.mark.parametrize("gamma", [0.2, 1.0, 3.0])
def test_ach_operators_normalized_and_consistent(gamma):
    for tau in regular_taus(30, seed=13):
        lp, lm = ach_operators_analytic(tau, gamma)
        for op in (lp, lm):
            assert np.trace(op.conj().T @ op).real == pytest.approx(1.0, abs=1e-12)
            assert abs(np.trace(op)) <= 1e-12
        assert abs(np.trace(lp.conj().T @ lm)) <= 1e-10
        plus, minus = ach_rates_analytic(tau, gamma)
        rebuilt = plus * dissipator(lp) + minus * dissipator(lm)
        gen = generator_dissipative(tau, gamma)
        assert np.max(np.abs(rebuilt - gen.action)) <= 1e-9 * max(1, abs(np.tan(2 * tau)))


def test_ach_operator_coefficients_unit_norm():
    # unit norm holds for the first form itself, not only after the small-gamma fallback
    gamma, tau = 3.0, 0.3
    t = np.tan(2 * tau)
    s = np.sqrt(gamma**2 + 4 * t**2)
    for sign in (1, -1):
        norm = np.sqrt(gamma**2 + (2 * t - sign * s) ** 2)
        u1 = 1j * (-2 * t + sign * s) / norm
        u2 = gamma / norm
        assert abs(u1) ** 2 + abs(u2) ** 2 == pytest.approx(1.0, abs=1e-14)


def test_ach_operators_zero_damping_limit():
    lp, lm = ach_operators_analytic(np.pi / 8, 0.0)
    assert same_channel(lp, SIGMA_Y / np.sqrt(2))
    lp, lm = ach_operators_analytic(3 * np.pi / 8, 0.0)
    assert same_channel(lm, SIGMA_Y / np.sqrt(2))


@settings(max_examples=200, deadline=None)
@given(
    tau=st.floats(0.0, np.pi, allow_nan=False).filter(lambda t: abs(t - nearest_singular_point(t)) > 1e-3),
    gamma=st.floats(1e-3, 20.0),
)
def test_rate_sign_law(tau, gamma):
    plus, minus = ach_rates_analytic(tau, gamma)
    t = np.tan(2 * tau)
    assert minus <= plus
    if abs(t) > 1e-9:
        assert (minus < 0) == (t < 0)
