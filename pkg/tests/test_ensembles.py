import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_hermitian
from knitsim.ensembles import (
    STABILIZER_STATES,
    EnsembleKind,
    draw,
    enumerate_ensemble,
    estimator_factor,
    mub_bases,
    reconstruction_identity_check,
    single_shot_estimator,
    two_design_states,
)
from knitsim.linalg import InvalidInputError, haar_moment_2
from knitsim.rng import substream

KINDS = list(EnsembleKind)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mub_bases_are_unbiased_and_a_2_design(n):
    d = 2**n
    bases = mub_bases(n)
    assert bases.shape == (d + 1, d, d)
    states = two_design_states(n)
    assert states.shape == (d * (d + 1), d)
    moment = sum(np.kron(np.outer(v, v.conj()), np.outer(v, v.conj()))
                 for v in states) / states.shape[0]
    assert np.abs(moment - haar_moment_2(d)).max() < 1e-10
    for a in range(d + 1):
        for b in range(a + 1, d + 1):
            overlaps = np.abs(bases[a].conj().T @ bases[b]) ** 2
            assert np.abs(overlaps - 1.0 / d).max() < 1e-10


def test_mub_bases_cached_and_capped():
    assert mub_bases(1) is mub_bases(1)
    with pytest.raises(InvalidInputError):
        mub_bases(5)


def test_stabilizer_states_normalized_and_distinct():
    for v in STABILIZER_STATES:
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    gram = np.abs(np.array(STABILIZER_STATES) @ np.array(STABILIZER_STATES).conj().T)
    assert np.abs(np.diag(gram) - 1.0).max() < 1e-12
    assert (gram - np.eye(6)).max() < 1.0 - 1e-9  # no duplicated state


@pytest.mark.parametrize("kind", KINDS)
def test_enumeration_probabilities(kind):
    for n in (1, 2):
        elements = enumerate_ensemble(kind, n)
        total = sum(p for p, _ in elements)
        assert abs(total - 1.0) < 1e-12
        for _, sample in elements:
            assert abs(np.linalg.norm(sample.state) - 1.0) < 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_draw_deterministic_and_member_of_ensemble(kind):
    a = draw(kind, 2, substream(5, "draw"))
    b = draw(kind, 2, substream(5, "draw"))
    assert np.array_equal(a.state, b.state)
    members = [s.state for _, s in enumerate_ensemble(kind, 2)]
    assert any(np.abs(a.state - m).max() < 1e-12 for m in members)


@pytest.mark.parametrize("kind", KINDS)
def test_estimator_factor_hermitian(kind, rng):
    for _ in range(10):
        sample = draw(kind, 2, rng)
        g = estimator_factor(sample)
        assert np.abs(g - g.conj().T).max() < 1e-12
        est = single_shot_estimator(sample, -0.3)
        assert np.abs(est.matrix + 0.3 * g).max() < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(KINDS), st.sampled_from([1, 2]))
def test_reconstruction_identity(seed, kind, n):
    a = rand_hermitian(2**n, substream(seed, "recon"))
    assert reconstruction_identity_check(kind, n, a) < 1e-10


def test_identity_pauli_has_positive_sign():
    # both eigenstates of the identity string must carry eigenvalue +1
    elements = enumerate_ensemble(EnsembleKind.PAULI_EIGENSTATES, 1)
    for _, s in elements:
        if s.pauli_index == (0,):
            assert s.pauli_sign == 1


def test_enumeration_cap():
    with pytest.raises(InvalidInputError):
        enumerate_ensemble(EnsembleKind.PAULI_EIGENSTATES, 4)
    with pytest.raises(InvalidInputError):
        draw(EnsembleKind.TWO_DESIGN, 0, substream(0))
