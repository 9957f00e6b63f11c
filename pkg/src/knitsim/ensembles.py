"""Probe-state ensembles and their single-shot estimators.

Three ensembles are supported: a maximal-MUB state 2-design, products of
single-qubit stabilizer states, and Pauli eigenstates. Each comes with the
linear-inversion post-processing that makes one measured eigenvalue into an
unbiased matrix estimate of the effective observable, plus an exact
reconstruction identity checkable by full enumeration at small n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import (
    PAULIS,
    HermitianOperator,
    InvalidInputError,
    haar_moment_2,
    kron_all,
)

MAX_ENUM_QUBITS = 3


class EnsembleKind(str, Enum):
    TWO_DESIGN = "two_design"
    STABILIZER_PRODUCT = "stabilizer_product"
    PAULI_EIGENSTATES = "pauli_eigenstates"


# single-qubit stabilizer states: Z, X, Y eigenbases
_SQ = 1 / np.sqrt(2)
STABILIZER_STATES = (
    np.array([1, 0], dtype=complex),            # |0>
    np.array([0, 1], dtype=complex),            # |1>
    np.array([_SQ, _SQ], dtype=complex),        # |+>
    np.array([_SQ, -_SQ], dtype=complex),       # |->
    np.array([_SQ, 1j * _SQ], dtype=complex),   # |+i>
    np.array([_SQ, -1j * _SQ], dtype=complex),  # |-i>
)

# eigenvectors (columns) and eigenvalues of each single-qubit Pauli, index 0..3
# the identity assigns eigenvalue +1 to both computational basis states
_PAULI_EIGVECS = (
    np.eye(2, dtype=complex),
    np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    np.array([[_SQ, _SQ], [1j * _SQ, -1j * _SQ]], dtype=complex),
    np.eye(2, dtype=complex),
)
_PAULI_EIGVALS = ((1, 1), (1, -1), (1, -1), (1, -1))


@dataclass(eq=False)
class ProbeSample:
    """One drawn input state with the metadata its estimator needs."""

    kind: EnsembleKind
    state: np.ndarray
    pauli_index: tuple | None = None   # i in {0..3}^n, pauli kind only
    pauli_sign: int | None = None      # eigenvalue c of the drawn eigenstate
    qubit_labels: tuple | None = field(default=None)  # per-qubit state labels

    @property
    def n(self) -> int:
        return self.state.shape[0].bit_length() - 1


# ---------------------------------------------------------------------------
# MUB construction (2-design realization)

def _pauli_commutes(a: tuple, b: tuple) -> bool:
    """Do the Pauli strings with index tuples a, b commute?"""
    anti = 0
    for x, y in zip(a, b):
        if x != 0 and y != 0 and x != y:
            anti += 1
    return anti % 2 == 0


def _pauli_mul(a: tuple, b: tuple) -> tuple:
    """Index tuple of the product a.b up to phase."""
    table = {(0, 0): 0, (1, 1): 0, (2, 2): 0, (3, 3): 0}
    out = []
    for x, y in zip(a, b):
        if x == 0:
            out.append(y)
        elif y == 0 or x == y:
            out.append(0 if x == y else x)
        else:
            out.append(({1, 2, 3} - {x, y}).pop())
    return tuple(out)


def _partition_paulis(n: int) -> list[list[tuple]]:
    """Partition the 4^n - 1 nontrivial Pauli strings into 2^n + 1 maximal
    abelian classes (each class of size 2^n - 1, closed under products).

    Deterministic backtracking over lexicographically ordered strings.
    """
    labels = [t for t in itertools.product(range(4), repeat=n) if any(t)]
    d = 2**n
    classes: list[list[tuple]] = []
    unused = set(labels)

    def close(cls: list[tuple]) -> list[tuple] | None:
        # close under multiplication; fail on anticommuting or reused members
        members = list(cls)
        for a, b in itertools.combinations(members, 2):
            if not _pauli_commutes(a, b):
                return None
            p = _pauli_mul(a, b)
            if p not in members:
                members.append(p)
        if len(members) != len(set(members)):
            return None
        return members

    def extend(cls: list[tuple]) -> list[tuple] | None:
        if len(cls) == d - 1:
            return cls
        for cand in labels:
            if cand not in unused or cand in cls:
                continue
            if all(_pauli_commutes(cand, m) for m in cls):
                closed = close(cls + [cand])
                if closed is None or len(closed) > d - 1:
                    continue
                if any(m not in unused for m in closed):
                    continue
                result = extend(sorted(closed))
                if result is not None:
                    return result
        return None

    while unused:
        seed_label = min(unused)
        cls = extend([seed_label])
        if cls is None:
            raise RuntimeError("Pauli partition backtracking failed")
        for m in cls:
            unused.discard(m)
        classes.append(cls)
    if len(classes) != d + 1:
        raise RuntimeError("Pauli partition produced wrong class count")
    return classes


def _pauli_matrix(index: tuple) -> np.ndarray:
    return kron_all(PAULIS[i] for i in index)


_MUB_CACHE: dict[int, np.ndarray] = {}


def mub_bases(n: int) -> np.ndarray:
    """The 2^n + 1 mutually unbiased bases as an array (bases, dim, dim).

    Each class of commuting Pauli strings is jointly diagonalized by a single
    generic combination; the result is validated against the exact Haar
    2-moment before being cached.
    """
    if n in _MUB_CACHE:
        return _MUB_CACHE[n]
    if n > MAX_ENUM_QUBITS:
        raise InvalidInputError(f"MUB tables only stored for n <= {MAX_ENUM_QUBITS}")
    d = 2**n
    bases = []
    for cls in _partition_paulis(n):
        combo = sum((3.0**k) * _pauli_matrix(m) for k, m in enumerate(cls, start=1))
        op = HermitianOperator(combo)
        _, vecs = op.eig()
        bases.append(vecs)
    bases = np.array(bases)
    _validate_two_design(bases, d)
    _MUB_CACHE[n] = bases
    return bases


def _validate_two_design(bases: np.ndarray, d: int) -> None:
    states = bases.transpose(0, 2, 1).reshape(-1, d)
    moment = np.zeros((d * d, d * d), dtype=complex)
    for v in states:
        proj = np.outer(v, v.conj())
        moment += np.kron(proj, proj)
    moment /= states.shape[0]
    if np.abs(moment - haar_moment_2(d)).max() > 1e-10:
        raise RuntimeError("MUB construction failed the 2-design moment check")
    gram = np.abs(states @ states.conj().T) ** 2
    k = bases.shape[0]
    for a in range(k):
        for b in range(a + 1, k):
            block = gram[a * d:(a + 1) * d, b * d:(b + 1) * d]
            if np.abs(block - 1.0 / d).max() > 1e-10:
                raise RuntimeError("bases are not mutually unbiased")


def two_design_states(n: int) -> np.ndarray:
    """All states of the stored exact 2-design, shape (count, dim)."""
    bases = mub_bases(n)
    d = 2**n
    return bases.transpose(0, 2, 1).reshape(-1, d)


# ---------------------------------------------------------------------------
# Drawing and estimation

def _stab_state(labels: tuple) -> np.ndarray:
    vec = np.ones(1, dtype=complex)
    for s in labels:
        vec = np.kron(vec, STABILIZER_STATES[s])
    return vec


def _pauli_eigenstate(index: tuple, branches: tuple) -> tuple[np.ndarray, int]:
    vec = np.ones(1, dtype=complex)
    sign = 1
    for i, e in zip(index, branches):
        vec = np.kron(vec, _PAULI_EIGVECS[i][:, e])
        sign *= _PAULI_EIGVALS[i][e]
    return vec, sign


def draw(kind: EnsembleKind, n: int, rng) -> ProbeSample:
    """Draw one probe state from the requested ensemble."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    kind = EnsembleKind(kind)
    if kind is EnsembleKind.TWO_DESIGN:
        states = two_design_states(n)
        idx = int(rng.integers(states.shape[0]))
        return ProbeSample(kind, states[idx])
    if kind is EnsembleKind.STABILIZER_PRODUCT:
        labels = tuple(int(x) for x in rng.integers(6, size=n))
        return ProbeSample(kind, _stab_state(labels), qubit_labels=labels)
    index = tuple(int(x) for x in rng.integers(4, size=n))
    branches = tuple(int(x) for x in rng.integers(2, size=n))
    vec, sign = _pauli_eigenstate(index, branches)
    return ProbeSample(kind, vec, pauli_index=index, pauli_sign=sign)


def single_shot_estimator(sample: ProbeSample, nu: float) -> HermitianOperator:
    """Unbiased one-shot matrix estimate from a measured eigenvalue nu."""
    return HermitianOperator(nu * estimator_factor(sample))


def estimator_factor(sample: ProbeSample) -> np.ndarray:
    """The sample-dependent matrix G with estimator = nu * G."""
    n = sample.n
    d = 2**n
    if sample.kind is EnsembleKind.TWO_DESIGN:
        proj = np.outer(sample.state, sample.state.conj())
        return d * (d + 1) * proj - d * np.eye(d)
    if sample.kind is EnsembleKind.STABILIZER_PRODUCT:
        factors = []
        for s in sample.qubit_labels:
            u = STABILIZER_STATES[s]
            factors.append(6 * np.outer(u, u.conj()) - 2 * np.eye(2))
        return kron_all(factors)
    return (4.0**n) * sample.pauli_sign * _pauli_matrix(sample.pauli_index)


def enumerate_ensemble(kind: EnsembleKind, n: int):
    """The full finite ensemble as a list of (probability, ProbeSample)."""
    kind = EnsembleKind(kind)
    if n > MAX_ENUM_QUBITS:
        raise InvalidInputError(f"enumeration limited to n <= {MAX_ENUM_QUBITS}")
    if kind is EnsembleKind.TWO_DESIGN:
        states = two_design_states(n)
        p = 1.0 / states.shape[0]
        return [(p, ProbeSample(kind, s)) for s in states]
    if kind is EnsembleKind.STABILIZER_PRODUCT:
        p = 1.0 / 6**n
        return [
            (p, ProbeSample(kind, _stab_state(labels), qubit_labels=labels))
            for labels in itertools.product(range(6), repeat=n)
        ]
    p = 1.0 / 8**n
    out = []
    for index in itertools.product(range(4), repeat=n):
        for branches in itertools.product(range(2), repeat=n):
            vec, sign = _pauli_eigenstate(index, branches)
            out.append((p, ProbeSample(kind, vec, pauli_index=index, pauli_sign=sign)))
    return out


def reconstruction_identity_check(kind: EnsembleKind, n: int, a: HermitianOperator) -> float:
    """Max-norm deviation of the exact linear-inversion identity.

    Sums the estimator expectation over the whole finite ensemble assuming
    the measured eigenvalue averages to tr[A |psi><psi|]; returns
    ||sum - A||_inf, which must vanish for an unbiased ensemble.
    """
    total = np.zeros((2**n, 2**n), dtype=complex)
    for p, sample in enumerate_ensemble(kind, n):
        mean_nu = np.vdot(sample.state, a.matrix @ sample.state).real
        total += p * mean_nu * estimator_factor(sample)
    return float(np.abs(total - a.matrix).max())
