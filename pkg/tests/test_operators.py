import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfi_workbench.errors import DimensionError, HermiticityError, NumericalError
from qfi_workbench.operators import (
    SIGMA_X,
    SIGMA_Z,
    check_hermitian,
    check_state,
    cluster_eigenvalues,
    commutator,
    eigendecompose,
    evolution_operator,
    expectation,
    hs_inner,
    is_unitary,
    max_norm,
    random_hermitian,
    random_state,
    variance,
)

from oracles import propagator

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=8)


def test_pauli_z_two_clusters():
    dec = eigendecompose(SIGMA_Z)
    assert np.allclose(dec.eigenvalues, [-1, 1])
    assert dec.multiplicities == (1, 1)


def test_identity_single_cluster():
    dec = eigendecompose(np.eye(3))
    assert dec.multiplicities == (3,)
    assert np.allclose(dec.projector(0), np.eye(3))


def test_spin_eigenvectors_match_closed_form():
    theta = 0.3
    H = np.cos(theta) * SIGMA_X + np.sin(theta) * SIGMA_Z
    dec = eigendecompose(H)
    assert np.allclose(dec.eigenvalues, [-1, 1])
    # |+> = (cos(phi/2), sin(phi/2)) with phi the polar angle from z
    phi = np.pi / 2 - theta
    plus = np.array([np.cos(phi / 2), np.sin(phi / 2)])
    minus = np.array([-np.sin(phi / 2), np.cos(phi / 2)])
    assert abs(abs(np.vdot(plus, dec.eigenvectors[:, 1])) - 1) < 1e-12
    assert abs(abs(np.vdot(minus, dec.eigenvectors[:, 0])) - 1) < 1e-12


def test_non_hermitian_rejected():
    with pytest.raises(HermiticityError):
        eigendecompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_non_square_rejected():
    with pytest.raises(DimensionError):
        eigendecompose(np.zeros((2, 3)))


def test_ambiguous_cluster_chain():
    with pytest.raises(NumericalError) as info:
        cluster_eigenvalues(np.array([0.0, 0.6e-8, 1.2e-8, 1.0]), 1e-8)
    assert "cluster" in info.value.diagnostics


def test_near_degenerate_grouped():
    dec = eigendecompose(np.diag([1.0, 1.0 + 1e-12, 2.0]))
    assert dec.multiplicities == (2, 1)


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_decomposition_invariants(seed, d):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, d, scale=3.0)
    dec = eigendecompose(H)
    assert max_norm(dec.reconstruct() - H) <= 1e-10 * max(1.0, max_norm(H))
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    v = dec.eigenvectors
    assert max_norm(v.conj().T @ v - np.eye(d)) < 1e-12
    for c in dec.clusters:
        assert dec.eigenvalues[c[-1]] - dec.eigenvalues[c[0]] <= dec.cluster_tol
    vals = dec.cluster_values
    assert np.all(np.diff(vals) > dec.cluster_tol)
    assert max_norm(sum(dec.projector(k) for k in range(len(dec.clusters))) - np.eye(d)) < 1e-12


def test_evolution_at_zero_is_identity(rng):
    dec = eigendecompose(random_hermitian(rng, 4))
    assert np.allclose(evolution_operator(dec, 0.0), np.eye(4))


def test_evolution_pauli_z_quarter_period():
    U = evolution_operator(eigendecompose(SIGMA_Z), np.pi / 2)
    assert np.allclose(U, np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.floats(min_value=-20, max_value=20))
def test_evolution_matches_taylor_oracle(seed, d, t):
    H = random_hermitian(np.random.default_rng(seed), d)
    U = evolution_operator(eigendecompose(H), t)
    assert is_unitary(U)
    assert max_norm(U - propagator(H, t)) < 1e-9


def test_evolution_rejects_nonfinite_time():
    with pytest.raises(ValueError):
        evolution_operator(eigendecompose(SIGMA_Z), np.inf)


def test_check_hermitian_relative_tolerance():
    m = 1e6 * SIGMA_X + 1e-7 * np.array([[0, 1], [0, 0]])
    check_hermitian(m)
    with pytest.raises(HermiticityError):
        check_hermitian(SIGMA_X + 1e-6 * np.array([[0, 1], [0, 0]]))


def test_state_checks():
    check_state(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        check_state(np.array([1.0, 1.0]))
    with pytest.raises(DimensionError):
        check_state(np.array([1.0, 0.0]), dim=3)


def test_expectation_and_variance_of_pauli():
    plus = np.array([1, 1]) / np.sqrt(2)
    assert expectation(SIGMA_Z, plus) == pytest.approx(0.0, abs=1e-15)
    assert variance(SIGMA_Z, plus) == pytest.approx(1.0)
    assert variance(SIGMA_Z, np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_variance_matches_definition(seed, d):
    rng = np.random.default_rng(seed)
    M = random_hermitian(rng, d)
    psi = random_state(rng, d)
    direct = np.vdot(psi, M @ M @ psi).real - np.vdot(psi, M @ psi).real ** 2
    assert variance(M, psi) == pytest.approx(direct, abs=1e-12)


def test_commutator_and_hs_inner():
    assert np.allclose(commutator(SIGMA_X, SIGMA_Z), -2j * np.array([[0, -1j], [1j, 0]]))
    assert hs_inner(SIGMA_X, SIGMA_X) == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        commutator(SIGMA_X, np.eye(3))


def test_with_phases_preserves_projectors(rng):
    dec = eigendecompose(random_hermitian(rng, 3))
    rotated = dec.with_phases(np.exp(1j * rng.uniform(0, 2 * np.pi, 3)))
    for k in range(len(dec.clusters)):
        assert np.allclose(dec.projector(k), rotated.projector(k))
