"""Channels, measure-and-prepare channels, and measurement sampling.

CPTP maps are stored as Kraus lists; unitary+ancilla circuits are converted
to Kraus form at construction by slicing the isometry, so Schroedinger and
Heisenberg application share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DensityOperator,
    HermitianOperator,
    InvalidInputError,
    as_matrix,
    dagger,
    herm_eig,
)

KRAUS_TOL = 1e-10


class NumericIntegrityError(RuntimeError):
    """Probabilities drifted beyond the tolerated numerical slack."""


@dataclass(eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators (out_dim x in_dim each)."""

    kraus: list

    def __post_init__(self):
        ks = [as_matrix(k) for k in self.kraus]
        if not ks:
            raise InvalidInputError("need at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise InvalidInputError("Kraus operators must share one shape")
        total = sum(dagger(k) @ k for k in ks)
        if np.abs(total - np.eye(shape[1])).max() > KRAUS_TOL:
            raise InvalidInputError("Kraus operators are not trace preserving")
        self.kraus = ks

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus[0].shape[0]

    @staticmethod
    def identity(dim: int) -> "QuantumChannel":
        return QuantumChannel([np.eye(dim, dtype=complex)])

    @staticmethod
    def from_unitary(u) -> "QuantumChannel":
        return QuantumChannel([as_matrix(u)])

    @staticmethod
    def from_isometry(v, env_dim: int) -> "QuantumChannel":
        """Kraus form of X -> tr_env[V X V'] for an isometry V: in -> out (x) env.

        The environment is the trailing tensor factor; Kraus operator e is
        (I (x) <e|) V.
        """
        v = as_matrix(v)
        if v.shape[0] % env_dim:
            raise InvalidInputError("isometry rows not divisible by env_dim")
        out_dim = v.shape[0] // env_dim
        if np.abs(dagger(v) @ v - np.eye(v.shape[1])).max() > KRAUS_TOL:
            raise InvalidInputError("matrix is not an isometry")
        blocks = v.reshape(out_dim, env_dim, v.shape[1])
        return QuantumChannel([blocks[:, e, :] for e in range(env_dim)])

    @staticmethod
    def from_unitary_ancilla(u, ancilla_dim: int) -> "QuantumChannel":
        """Channel X -> tr_anc[U (X (x) |0><0|) U'], ancilla is the trailing factor."""
        u = as_matrix(u)
        in_dim = u.shape[0] // ancilla_dim
        emb = np.zeros((ancilla_dim, 1), dtype=complex)
        emb[0, 0] = 1.0
        iso = u @ np.kron(np.eye(in_dim), emb)
        return QuantumChannel.from_isometry(iso, ancilla_dim)


def apply_mat(ch: QuantumChannel, x: np.ndarray) -> np.ndarray:
    return sum(k @ x @ dagger(k) for k in ch.kraus)


def apply(ch: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    if rho.dim != ch.in_dim:
        raise InvalidInputError("state dim does not match channel input")
    return DensityOperator(apply_mat(ch, rho.matrix))


def adjoint_apply(ch: QuantumChannel, obs: HermitianOperator) -> HermitianOperator:
    """Heisenberg evolution: O -> sum K' O K."""
    if obs.dim != ch.out_dim:
        raise InvalidInputError("observable dim does not match channel output")
    out = sum(dagger(k) @ obs.matrix @ k for k in ch.kraus)
    return HermitianOperator(out)


@dataclass(eq=False)
class MPChannel:
    """Measure-and-prepare channel: pinching in the columns of a unitary.

    Without weights it is the channel-mode cut (measure in basis V, re-prepare
    the observed basis state). With weights it is the classical-readout cut:
    measure in basis V and emit the weight of the observed outcome.
    """

    basis: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = as_matrix(self.basis)
        if np.abs(dagger(v) @ v - np.eye(v.shape[0])).max() > 1e-10:
            raise InvalidInputError("basis is not unitary within 1e-10")
        self.basis = v
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (v.shape[0],):
                raise InvalidInputError("weights length must equal dim")
            self.weights = w

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def mp_apply(mp: MPChannel, x):
    """Pinch x in the channel's basis (channel mode).

    Accepts DensityOperator, HermitianOperator, or a raw matrix; the proofs
    pinch observables as well as states, so all three are supported.
    """
    if mp.weights is not None:
        raise InvalidInputError("mp_apply is channel mode; use mp_classical")
    if isinstance(x, DensityOperator):
        return DensityOperator(_pinch(mp.basis, x.matrix))
    if isinstance(x, HermitianOperator):
        return HermitianOperator(_pinch(mp.basis, x.matrix))
    return _pinch(mp.basis, as_matrix(x))


def _pinch(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    rotated = dagger(v) @ x @ v
    return v @ np.diag(np.diag(rotated)) @ dagger(v)


def mp_classical(mp: MPChannel, rho: DensityOperator) -> float:
    """Measure rho in the channel's basis and average the outcome weights.

    Returns sum_j <j|V' rho V|j> w_j, i.e. tr[(V diag(w) V') rho].
    """
    if mp.weights is None:
        raise InvalidInputError("mp_classical needs weights")
    probs = np.diag(dagger(mp.basis) @ rho.matrix @ mp.basis).real
    return float(probs @ mp.weights)


@dataclass(eq=False)
class MeasurementSpec:
    """Projective measurement of an observable in its eigenbasis."""

    observable: HermitianOperator

    def distribution(self, rho: DensityOperator):
        """Outcome probabilities and eigenvalues for measuring rho."""
        vals, vecs = self.observable.eig()
        probs = np.einsum("ij,jk,ki->i", dagger(vecs), rho.matrix, vecs).real
        drift = max(0.0, -probs.min()) + abs(probs.sum() - 1.0)
        if drift > 1e-9:
            raise NumericIntegrityError(f"probability drift {drift}")
        probs = np.clip(probs, 0.0, 1.0)
        probs = probs / probs.sum()
        return probs, vals


def sample_outcome(spec: MeasurementSpec, rho: DensityOperator, rng) -> tuple[int, float]:
    """Sample one measurement outcome (index, eigenvalue)."""
    probs, vals = spec.distribution(rho)
    j = int(rng.choice(len(probs), p=probs))
    return j, float(vals[j])


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fixing."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(in_dim: int, out_dim: int, rng, env_dim: int | None = None) -> QuantumChannel:
    """Random CPTP map from a Haar unitary on system + environment."""
    if env_dim is None:
        env_dim = max(2, in_dim * 2 // out_dim if out_dim < in_dim * 2 else 2)
    total = out_dim * env_dim
    if total < in_dim:
        raise InvalidInputError("environment too small for an isometry")
    u = haar_unitary(total, rng)
    return QuantumChannel.from_isometry(u[:, :in_dim], env_dim)


def pinching_basis(obs: HermitianOperator) -> np.ndarray:
    """Deterministic eigenbasis used for cuts built from obs."""
    _, vecs = herm_eig(obs)
    return vecs
