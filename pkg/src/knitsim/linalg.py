"""Dense complex matrix kernel.

Hermitian eigendecomposition with a deterministic ordering/phase convention,
Schatten norms, tensor products, partial trace, SWAP-operator utilities, and
the exact second Haar moment. Everything operates on complex128 ndarrays;
the wrapper dataclasses carry validation and an eigendecomposition cache.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import check_dim

HERM_TOL = 1e-12
RECON_TOL = 1e-10

# single-qubit Paulis, indexed 1..4 as (I, X, Y, Z)
PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite complex128 2-d array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got ndim={arr.ndim}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise InvalidInputError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max() <= tol


@dataclass(eq=False)
class HermitianOperator:
    """Observable with a cached deterministic eigendecomposition."""

    matrix: np.ndarray
    _eig: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise InvalidInputError("matrix is not Hermitian within 1e-12")
        # symmetrize to absorb numerical drift from channel adjoints
        self.matrix = (m + dagger(m)) / 2

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eig(self):
        if self._eig is None:
            self._eig = herm_eig(self)
        return self._eig

    def op_norm(self) -> float:
        vals, _ = self.eig()
        return float(np.abs(vals).max())


@dataclass(eq=False)
class DensityOperator:
    """Quantum state as a dense density matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise InvalidInputError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise InvalidInputError(f"density matrix trace {tr} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise InvalidInputError("density matrix has negative eigenvalues")
        self.matrix = (m + dagger(m)) / 2

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def pure(vec) -> "DensityOperator":
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return DensityOperator(np.outer(v, v.conj()))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of each column real positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            a = col[idx[0]]
            out[:, k] = col * (a.conj() / abs(a))
    return out


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic eigendecomposition of a Hermitian operator.

    Eigenvalues descending; ties broken by lexicographic comparison of the
    eigenvector component magnitudes; each eigenvector's first non-negligible
    component is made real positive. Repeated calls on bit-identical input
    give bit-identical output.
    """
    if isinstance(h, HermitianOperator):
        m = h.matrix
    else:
        m = as_matrix(h)
        if not is_hermitian(m):
            raise InvalidInputError("herm_eig requires a Hermitian matrix")
        m = (m + dagger(m)) / 2
    vals, vecs = np.linalg.eigh(m)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    vecs = _fix_phases(vecs)
    # lexicographic tie-break inside (numerically) degenerate groups
    start = 0
    for stop in range(1, len(vals) + 1):
        if stop == len(vals) or abs(vals[stop] - vals[start]) > 1e-9:
            if stop - start > 1:
                block = vecs[:, start:stop]
                keys = sorted(range(stop - start),
                              key=lambda j: tuple(np.round(np.abs(block[:, j]), 9)))
                vecs[:, start:stop] = block[:, keys]
            start = stop
    return vals.astype(float), vecs


def op_norm(m) -> float:
    """Largest singular value (Schatten-infinity norm)."""
    return float(np.linalg.svd(as_matrix(m), compute_uv=False).max())


def trace_norm(m) -> float:
    """Sum of singular values (Schatten-1 norm)."""
    return float(np.linalg.svd(as_matrix(m), compute_uv=False).sum())


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    check_dim(a.shape[0] * b.shape[0])
    check_dim(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out all subsystems not listed in keep.

    dims lists the subsystem dimensions in tensor order; keep is an iterable
    of subsystem indices to retain (in their original order).
    """
    m = as_matrix(m)
    dims = list(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise InvalidInputError(f"dims {dims} inconsistent with shape {m.shape}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise InvalidInputError("keep indices out of range")
    n = len(dims)
    tensor = m.reshape(dims + dims)
    # contract row/col indices of every traced subsystem
    traced = [i for i in range(n) if i not in keep]
    for i in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + n)
        n -= 1
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(d_keep, d_keep)


def swap_operator(n: int) -> np.ndarray:
    """SWAP of two n-qubit registers: sum_{ij} |ij><ji|."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    d = 2**n
    check_dim(d * d)
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s


def haar_moment_2(d: int) -> np.ndarray:
    """Exact second moment of Haar-random pure states: (I + SWAP)/(d(d+1))."""
    if d < 2 or (d & (d - 1)) != 0:
        raise InvalidInputError("d must be a power of two >= 2")
    n = d.bit_length() - 1
    return (np.eye(d * d, dtype=complex) + swap_operator(n)) / (d * (d + 1))
