import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_hermitian, rand_state
from knitsim.config import ResourceError
from knitsim.linalg import (
    PAULI_X,
    PAULI_Z,
    DensityOperator,
    HermitianOperator,
    InvalidInputError,
    haar_moment_2,
    herm_eig,
    kron,
    kron_all,
    op_norm,
    partial_trace,
    swap_operator,
    trace_norm,
)
from knitsim.rng import substream


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        HermitianOperator(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(InvalidInputError):
        HermitianOperator(np.array([[np.inf, 0], [0, 1]]))


def test_hermitian_operator_rejects_nonhermitian():
    with pytest.raises(InvalidInputError):
        HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))


def test_density_operator_validation():
    with pytest.raises(InvalidInputError):
        DensityOperator(np.eye(2))  # trace 2
    with pytest.raises(InvalidInputError):
        DensityOperator(np.diag([1.5, -0.5]))  # negative eigenvalue
    rho = DensityOperator.pure([1.0, 1.0])
    assert abs(np.trace(rho.matrix) - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4, 6]))
def test_herm_eig_reconstructs(seed, d):
    h = rand_hermitian(d, substream(seed, "eig"))
    vals, vecs = herm_eig(h)
    assert np.abs(vecs @ np.diag(vals) @ vecs.conj().T - h.matrix).max() < 1e-10
    assert np.abs(vecs.conj().T @ vecs - np.eye(d)).max() < 1e-10
    assert all(vals[i] >= vals[i + 1] for i in range(d - 1))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_herm_eig_deterministic(seed):
    h = rand_hermitian(4, substream(seed, "eig-det"))
    v1, w1 = herm_eig(HermitianOperator(h.matrix.copy()))
    v2, w2 = herm_eig(HermitianOperator(h.matrix.copy()))
    assert np.array_equal(v1, v2) and np.array_equal(w1, w2)


def test_herm_eig_degenerate_is_stable():
    h = HermitianOperator(np.eye(4, dtype=complex))
    _, vecs1 = herm_eig(h)
    _, vecs2 = herm_eig(HermitianOperator(np.eye(4, dtype=complex)))
    assert np.array_equal(vecs1, vecs2)


def test_herm_eig_phase_convention():
    _, vecs = herm_eig(HermitianOperator(PAULI_X))
    for k in range(2):
        lead = vecs[np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)[0], k]
        assert abs(lead.imag) < 1e-12 and lead.real > 0


def test_norms_against_known_values():
    assert abs(op_norm(np.diag([3.0, -5.0])) - 5.0) < 1e-12
    assert abs(trace_norm(np.diag([3.0, -5.0])) - 8.0) < 1e-12
    assert abs(op_norm(PAULI_Z) - 1.0) < 1e-12


def test_kron_matches_numpy(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    assert np.array_equal(kron(a, b), np.kron(a, b))
    assert np.array_equal(kron_all([a, b, a]), np.kron(np.kron(a, b), a))


def test_kron_respects_dimension_cap(monkeypatch):
    monkeypatch.setenv("KNITSIM_MAX_DIM", "8")
    with pytest.raises(ResourceError):
        kron(np.eye(4), np.eye(4))
    kron(np.eye(2), np.eye(4))  # exactly at the cap


def test_partial_trace_product_states(rng):
    a, b = rand_state(2, rng), rand_state(3, rng)
    full = np.kron(a.matrix, b.matrix)
    assert np.abs(partial_trace(full, [2, 3], [0]) - a.matrix).max() < 1e-12
    assert np.abs(partial_trace(full, [2, 3], [1]) - b.matrix).max() < 1e-12
    assert abs(partial_trace(full, [2, 3], []) - 1.0) < 1e-12


def test_partial_trace_three_factors(rng):
    mats = [rand_state(2, rng).matrix for _ in range(3)]
    full = np.kron(np.kron(mats[0], mats[1]), mats[2])
    got = partial_trace(full, [2, 2, 2], [0, 2])
    assert np.abs(got - np.kron(mats[0], mats[2])).max() < 1e-12


def test_partial_trace_errors():
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(4), [2, 3], [0])
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(4), [2, 2], [5])


def test_swap_operator_action(rng):
    s = swap_operator(1)
    a, b = rand_state(2, rng), rand_state(2, rng)
    swapped = s @ np.kron(a.matrix, b.matrix) @ s.conj().T
    assert np.abs(swapped - np.kron(b.matrix, a.matrix)).max() < 1e-12
    assert np.abs(s @ s - np.eye(4)).max() < 1e-12


def test_haar_moment_2_properties():
    for d in (2, 4):
        m = haar_moment_2(d)
        assert abs(np.trace(m) - 1.0) < 1e-12
        # supported on the symmetric subspace: SWAP m = m
        s = swap_operator(d.bit_length() - 1)
        assert np.abs(s @ m - m).max() < 1e-12
    with pytest.raises(InvalidInputError):
        haar_moment_2(3)
