import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_hermitian, rand_state
from knitsim.channels import (
    MeasurementSpec,
    MPChannel,
    QuantumChannel,
    adjoint_apply,
    apply,
    apply_mat,
    haar_unitary,
    mp_apply,
    mp_classical,
    random_channel,
    sample_outcome,
)
from knitsim.linalg import (
    DensityOperator,
    HermitianOperator,
    InvalidInputError,
    op_norm,
)
from knitsim.rng import substream


def test_channel_rejects_non_trace_preserving():
    with pytest.raises(InvalidInputError):
        QuantumChannel([np.eye(2) * 0.5])
    with pytest.raises(InvalidInputError):
        QuantumChannel([])


def test_channel_dims():
    ch = QuantumChannel.from_isometry(np.eye(4)[:, :2], env_dim=2)
    assert ch.in_dim == 2 and ch.out_dim == 2 and len(ch.kraus) == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_heisenberg_schrodinger_duality(seed, d):
    rng = substream(seed, "duality")
    ch = random_channel(d, d, rng)
    obs = rand_hermitian(d, rng)
    rho = rand_state(d, rng)
    forward = float(np.trace(obs.matrix @ apply(ch, rho).matrix).real)
    backward = float(np.trace(adjoint_apply(ch, obs).matrix @ rho.matrix).real)
    assert abs(forward - backward) < 1e-10


def test_random_channel_preserves_trace(rng):
    ch = random_channel(4, 2, rng)
    rho = rand_state(4, rng)
    out = apply(ch, rho)
    assert abs(np.trace(out.matrix) - 1.0) < 1e-10


def test_from_unitary_ancilla_matches_isometry(rng):
    u = haar_unitary(8, rng)
    ch = QuantumChannel.from_unitary_ancilla(u, ancilla_dim=2)
    assert ch.in_dim == 4 and ch.out_dim == 4
    rho = rand_state(4, rng)
    apply(ch, rho)  # valid CPTP output


def test_mp_channel_requires_unitary_basis():
    with pytest.raises(InvalidInputError):
        MPChannel(np.ones((2, 2)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pinching_idempotent_unital_contractive(seed):
    rng = substream(seed, "pinch")
    v = haar_unitary(4, rng)
    mp = MPChannel(v)
    x = rand_hermitian(4, rng)
    once = mp_apply(mp, x.matrix)
    twice = mp_apply(mp, once)
    assert np.abs(twice - once).max() < 1e-10
    assert np.abs(mp_apply(mp, np.eye(4, dtype=complex)) - np.eye(4)).max() < 1e-10
    assert op_norm(once) <= x.op_norm() + 1e-10


def test_mp_apply_rejects_weighted_channel(rng):
    mp = MPChannel(np.eye(2), weights=np.array([1.0, -1.0]))
    with pytest.raises(InvalidInputError):
        mp_apply(mp, np.eye(2))
    with pytest.raises(InvalidInputError):
        mp_classical(MPChannel(np.eye(2)), rand_state(2, rng))


def test_mp_classical_matches_observable(rng):
    v = haar_unitary(4, rng)
    w = rng.normal(size=4)
    mp = MPChannel(v, weights=w)
    rho = rand_state(4, rng)
    direct = float(np.trace(v @ np.diag(w) @ v.conj().T @ rho.matrix).real)
    assert abs(mp_classical(mp, rho) - direct) < 1e-10


def test_measurement_distribution_valid(rng):
    obs = rand_hermitian(4, rng)
    rho = rand_state(4, rng)
    probs, vals = MeasurementSpec(obs).distribution(rho)
    assert probs.min() >= 0 and abs(probs.sum() - 1.0) < 1e-12
    mean = float(probs @ vals)
    assert abs(mean - np.trace(obs.matrix @ rho.matrix).real) < 1e-9


def test_sample_outcome_deterministic(rng):
    obs = rand_hermitian(2, rng)
    rho = rand_state(2, rng)
    a = sample_outcome(MeasurementSpec(obs), rho, substream(3, "m"))
    b = sample_outcome(MeasurementSpec(obs), rho, substream(3, "m"))
    assert a == b


def test_haar_unitary_is_unitary(rng):
    for d in (2, 4, 8):
        u = haar_unitary(d, rng)
        assert np.abs(u.conj().T @ u - np.eye(d)).max() < 1e-10


def test_apply_dim_mismatch(rng):
    ch = QuantumChannel.identity(2)
    with pytest.raises(InvalidInputError):
        apply(ch, rand_state(4, rng))
    with pytest.raises(InvalidInputError):
        adjoint_apply(ch, rand_hermitian(4, rng))
