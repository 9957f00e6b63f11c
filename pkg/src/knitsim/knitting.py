"""Wire-cut constructions.

The rescaling-free cut replaces the identity wire between a state and a
downstream channel by a pinching in the eigenbasis of the Heisenberg-evolved
observable; expectation values are preserved exactly, and approximately when
the eigenbasis comes from a learned estimate. The conventional baseline is
the mid-circuit Pauli expansion with rescaling factor gamma = 4^n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channels import (
    MPChannel,
    QuantumChannel,
    adjoint_apply,
    apply_mat,
    dagger,
)
from .ensembles import _PAULI_EIGVALS, _PAULI_EIGVECS
from .linalg import (
    DensityOperator,
    HermitianOperator,
    InvalidInputError,
    kron_all,
    partial_trace,
)
from .tomography import LearnedObservable


class CutMode(str, Enum):
    CHANNEL = "channel"
    CLASSICAL = "classical"


@dataclass(eq=False)
class RescalingFreeCut:
    """MP-channel wire cut built from a (learned) effective observable."""

    mp: MPChannel
    mode: CutMode
    source_error_bound: float

    def __post_init__(self):
        self.mode = CutMode(self.mode)
        has_weights = self.mp.weights is not None
        if has_weights != (self.mode is CutMode.CLASSICAL):
            raise InvalidInputError("weights present iff mode is classical")


def exact_cut(channel: QuantumChannel, obs: HermitianOperator) -> MPChannel:
    """Pinching in the eigenbasis of the evolved observable.

    Inserting the returned channel before `channel` leaves tr[O Phi(rho)]
    unchanged for every input state.
    """
    effective = adjoint_apply(channel, obs)
    _, basis = effective.eig()
    return MPChannel(basis)


def approx_cut(learned: LearnedObservable, mode: CutMode) -> RescalingFreeCut:
    """Cut built from a learned estimate of the effective observable.

    Channel mode pinches in the estimate's eigenbasis (bias at most twice the
    tomography error per unit trace norm); classical mode also keeps the
    eigenvalues as readout weights (bias at most the tomography error).
    """
    mode = CutMode(mode)
    vals, basis = learned.estimate.eig()
    if mode is CutMode.CHANNEL:
        mp = MPChannel(basis)
    else:
        mp = MPChannel(basis, weights=vals)
    return RescalingFreeCut(mp, mode, 0.0)


@dataclass(eq=False)
class QpdWireCut:
    """Mid-circuit Pauli wire cut: id^n as a signed mixture of measure-and-
    prepare operations with rescaling factor gamma = 4^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")

    @property
    def gamma(self) -> float:
        return 4.0**self.n

    def sample(self, rho: DensityOperator, rng):
        """One QPD shot on the upstream state.

        Picks a Pauli string uniformly, measures rho in its eigenbasis
        (sign c), prepares a uniformly random eigenstate (sign c'), and
        returns (prepared pure-state vector, weight gamma * c * c').
        """
        index = tuple(int(x) for x in rng.integers(4, size=self.n))
        basis, signs = _pauli_basis(index)
        probs = np.einsum("ji,jk,ki->i", basis.conj(), rho.matrix, basis).real
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        e = int(rng.choice(len(probs), p=probs))
        e_prep = int(rng.integers(len(probs)))
        weight = self.gamma * signs[e] * signs[e_prep]
        return basis[:, e_prep], weight

    def terms(self):
        """Full enumeration of (probability, effect, prepared state, weight).

        Iterates every (Pauli, measured eigenstate, prepared eigenstate)
        combination; probability covers the Pauli and preparation draws, the
        measurement branch enters through the effect |v_e><v_e|.
        """
        p_choice = 1.0 / (4.0**self.n) / (2.0**self.n)
        for index in itertools.product(range(4), repeat=self.n):
            basis, signs = _pauli_basis(index)
            for e in range(basis.shape[1]):
                effect = np.outer(basis[:, e], basis[:, e].conj())
                for e_prep in range(basis.shape[1]):
                    prep = np.outer(basis[:, e_prep], basis[:, e_prep].conj())
                    weight = self.gamma * signs[e] * signs[e_prep]
                    yield p_choice, effect, prep, weight


def _pauli_basis(index: tuple):
    basis = kron_all(_PAULI_EIGVECS[i] for i in index)
    signs = np.ones(1)
    for i in index:
        signs = np.kron(signs, np.array(_PAULI_EIGVALS[i], dtype=float))
    return basis, signs


def pauli_qpd_cut(n: int) -> QpdWireCut:
    return QpdWireCut(n)


def two_block_check(u1: QuantumChannel, u2: QuantumChannel,
                    o1: HermitianOperator, o2: HermitianOperator,
                    dims: tuple[int, int, int]) -> tuple[float, float]:
    """Exact-cut deviation for the two-block circuit A-B-C.

    The circuit prepares |0...0>, applies u1 on (A,B) and u2 on (B,C), and
    measures o1 on A and o2 on (B,C). Cutting the B wire between the blocks
    with a pinching in the eigenbasis of either the upstream reduced operator
    Q1 = tr_A[o1 u1(|0><0|)] or the downstream Heisenberg operator
    Q2 = <0_C| u2^adj(o2) |0_C> must preserve the expectation value; returns
    the absolute deviations (dev_in, dev_out).
    """
    d_a, d_b, d_c = dims
    if o1.dim != d_a or o2.dim != d_b * d_c:
        raise InvalidInputError("observable dims inconsistent with registers")
    zero_ab = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    zero_ab[0, 0] = 1.0
    upstream = apply_mat(u1, zero_ab)

    # Q1: reduced operator on B after weighting A by o1
    q1 = partial_trace(np.kron(o1.matrix, np.eye(d_b)) @ upstream, [d_a, d_b], [1])
    q1 = HermitianOperator(q1)

    # downstream as a channel B -> (B,C): X -> u2(X (x) |0><0|_C)
    zero_c = np.zeros((d_c, 1), dtype=complex)
    zero_c[0, 0] = 1.0
    iso = u2.kraus[0] @ np.kron(np.eye(d_b), zero_c)
    phi = QuantumChannel([iso]) if _is_isometry(iso) else None
    if phi is None:
        raise InvalidInputError("u2 must be a unitary channel")
    q2 = adjoint_apply(phi, o2)

    # uncut reference from the full three-register simulation
    total = d_a * d_b * d_c
    zero_abc = np.zeros((total, total), dtype=complex)
    zero_abc[0, 0] = 1.0
    full1 = np.kron(u1.kraus[0], np.eye(d_c))
    full2 = np.kron(np.eye(d_a), u2.kraus[0])
    state = full2 @ (full1 @ zero_abc @ dagger(full1)) @ dagger(full2)
    exact = float(np.trace(np.kron(o1.matrix, o2.matrix) @ state).real)

    _, v_in = q1.eig()
    _, v_out = q2.eig()
    dev = []
    for basis in (v_in, v_out):
        pinched = basis @ np.diag(np.diag(dagger(basis) @ q1.matrix @ basis)) @ dagger(basis)
        value = float(np.trace(apply_mat(phi, pinched) @ o2.matrix).real)
        dev.append(abs(value - exact))
    return dev[0], dev[1]


def _is_isometry(v: np.ndarray) -> bool:
    return np.abs(dagger(v) @ v - np.eye(v.shape[1])).max() <= 1e-9


def z_sector_mp_identity(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the identity equating the rotated Z-sector Pauli sum with
    a single measure-and-prepare channel, as matrices acting on vec(X).

    Left: sum over P in {I,Z}^n of X -> (1/2^n) tr[U'PU X] U'PU.
    Right: X -> sum_j tr[U'|j><j|U X] U'|j><j|U.

    Superoperators are returned in row-major vec convention: the map
    X -> tr[E X] S has matrix outer(vec(S), vec(E.T)).
    """
    d = u.shape[0]
    n = d.bit_length() - 1
    left = np.zeros((d * d, d * d), dtype=complex)
    z_diag = np.array([1.0, -1.0])
    for bits in itertools.product((0, 1), repeat=n):
        diag = np.ones(1)
        for b in bits:
            diag = np.kron(diag, z_diag if b else np.ones(2))
        p = dagger(u) @ np.diag(diag).astype(complex) @ u
        left += np.outer(p.ravel(), p.T.ravel()) / d
    right = np.zeros_like(left)
    for j in range(d):
        proj = dagger(u) @ np.outer(np.eye(d)[j], np.eye(d)[j]) @ u
        right += np.outer(proj.ravel(), proj.T.ravel())
    return left, right
