"""Learning driver: randomized shots against a black-box channel.

learn() runs the draw -> evolve -> measure -> invert pipeline and averages
the single-shot matrix estimates. Because every ensemble here is a finite
set and the channel is fixed within a task, the N shots are drawn in one
vectorized pass over the exact joint (probe, outcome) distribution; the
sampled law is identical to looping shot by shot and the count-based
accumulation is exactly permutation invariant.

plan_shots() inverts the matrix Bernstein tail with the ensemble-specific
range/variance constants, giving a sufficient N for operator-norm accuracy
eps at confidence 1 - delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import MeasurementSpec, QuantumChannel, apply_mat
from .ensembles import EnsembleKind, enumerate_ensemble, estimator_factor
from .linalg import HermitianOperator, InvalidInputError, herm_eig
from .rng import substream

# exponent of the stabilizer-ensemble variance term: 10^n = d^(log2 10)
STAB_EXPONENT = math.log2(10.0)


@dataclass(eq=False)
class LearningTask:
    """One tomography job: estimate the Heisenberg-evolved observable."""

    channel: QuantumChannel
    observable: HermitianOperator
    kind: EnsembleKind
    shots: int
    seed: int
    path: tuple = ()

    def __post_init__(self):
        if self.observable.dim != self.channel.out_dim:
            raise InvalidInputError("observable dim must match channel output")
        if self.shots < 1:
            raise InvalidInputError("shots must be >= 1")
        self.kind = EnsembleKind(self.kind)


@dataclass(eq=False)
class LearnedObservable:
    estimate: HermitianOperator
    shots_used: int
    kind: EnsembleKind
    norm_bound_cap: float | None = None


def _kahan_add(total, comp, term):
    y = term - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def learn(task: LearningTask) -> LearnedObservable:
    """Unbiased operator-norm estimate of the effective observable.

    Deterministic given (seed, path); the channel is used only through its
    action on probe states and measurement statistics of the observable.
    """
    n = task.channel.in_dim.bit_length() - 1
    elements = enumerate_ensemble(task.kind, n)
    spec = MeasurementSpec(task.observable)
    eigvals, eigvecs = task.observable.eig()

    # exact joint distribution over (probe element, measurement outcome)
    probs = []
    for p, sample in elements:
        rho_in = np.outer(sample.state, sample.state.conj())
        sigma = apply_mat(task.channel, rho_in)
        out = np.einsum("ij,jk,ki->i", eigvecs.conj().T, sigma, eigvecs).real
        out = np.clip(out, 0.0, None)
        out = out / out.sum()
        probs.append(p * out)
    joint = np.concatenate(probs)
    joint = joint / joint.sum()

    rng = substream(task.seed, "tomography", task.path)
    counts = rng.multinomial(task.shots, joint).reshape(len(elements), -1)

    dim = task.channel.in_dim
    total = np.zeros((dim, dim), dtype=complex)
    comp = np.zeros_like(total)
    for (p, sample), row in zip(elements, counts):
        weight = float(row @ eigvals)
        if weight == 0.0:
            continue
        total, comp = _kahan_add(total, comp, weight * estimator_factor(sample))
    estimate = HermitianOperator(total / task.shots)
    return LearnedObservable(estimate, task.shots, task.kind)


def clip_norm(learned: LearnedObservable, cap: float) -> LearnedObservable:
    """Eigenvalue truncation of the estimate to operator norm cap (optional)."""
    vals, vecs = herm_eig(learned.estimate)
    vals = np.clip(vals, -cap, cap)
    est = HermitianOperator(vecs @ np.diag(vals) @ vecs.conj().T)
    return LearnedObservable(est, learned.shots_used, learned.kind, cap)


def plan_shots(kind: EnsembleKind, d_in: int, op_norm_o: float, eps: float, delta: float) -> int:
    """Sufficient shot count for ||estimate - target||_inf <= eps w.p. >= 1 - delta."""
    if not (0.0 < eps <= 1.0) or not (0.0 < delta <= 1.0):
        raise InvalidInputError("eps and delta must lie in (0, 1]")
    kind = EnsembleKind(kind)
    d = float(d_in)
    scale = 2.0 * max(1.0, op_norm_o**2)
    if kind is EnsembleKind.TWO_DESIGN:
        bracket = (d**2 + 1) * (d + 1 + eps / 3)
    elif kind is EnsembleKind.STABILIZER_PRODUCT:
        bracket = d**STAB_EXPONENT + (eps / 3) * (d**2 + 1)
    else:
        bracket = d**4 + 1 + (eps / 3) * (d**2 + 1)
    return math.ceil(scale * bracket / eps**2 * math.log(d / delta))


def bernstein_tail(n_shots: int, alpha: float, sigma_sq: float, d: int, eps: float) -> float:
    """Matrix Bernstein tail for the deviation of a sum of n mean-zero terms.

    alpha bounds each summand's operator norm and sigma_sq the total variance
    (both already carrying any 1/N scaling); returns
    d * exp(-(eps^2/2) / (sigma_sq + alpha*eps/3)).
    """
    if alpha < 0 or sigma_sq < 0:
        raise InvalidInputError("alpha and sigma_sq must be nonnegative")
    if eps == 0:
        return float(d)
    denom = sigma_sq + alpha * eps / 3.0
    if denom == 0:
        return 0.0
    return float(d * math.exp(-(eps**2) / 2.0 / denom))


def ensemble_constants(kind: EnsembleKind, d_in: int, op_norm_o: float, n_shots: int):
    """Per-shot range and variance constants (alpha, sigma_sq) of the mean.

    With N averaged shots: alpha = range_const * ||O|| / N and
    sigma_sq = ||O||^2 * var_const / N.
    """
    kind = EnsembleKind(kind)
    d = float(d_in)
    if kind is EnsembleKind.TWO_DESIGN:
        range_const = d**2 + 1
        var_const = (d**2 + 1) * (d + 1)
    elif kind is EnsembleKind.STABILIZER_PRODUCT:
        range_const = d**2 + 1
        var_const = d**STAB_EXPONENT + 1
    else:
        range_const = d**2 + 1
        var_const = d**4 + 1
    alpha = range_const * op_norm_o / n_shots
    sigma_sq = op_norm_o**2 * var_const / n_shots
    return alpha, sigma_sq
