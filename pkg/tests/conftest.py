import numpy as np
import pytest

from knitsim.channels import haar_unitary, random_channel
from knitsim.linalg import DensityOperator, HermitianOperator
from knitsim.rng import substream


def rand_hermitian(d: int, rng, norm: float | None = None) -> HermitianOperator:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2
    if norm is not None:
        h = h * (norm / np.abs(np.linalg.eigvalsh(h)).max())
    return HermitianOperator(h)


def rand_state(d: int, rng) -> DensityOperator:
    g = rng.normal(size=(d, 2 * d)) + 1j * rng.normal(size=(d, 2 * d))
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real)


@pytest.fixture
def rng():
    return substream(20260823, "tests")


__all__ = ["rand_hermitian", "rand_state", "haar_unitary", "random_channel"]
