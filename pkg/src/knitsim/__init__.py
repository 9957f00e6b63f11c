"""knitsim: rescaling-free wire cuts and learned tree-circuit estimation.

Desk-scale dense simulator for circuit knitting built on measure-and-prepare
channels that pinch in the eigenbasis of the effective observable, plus the
randomized-probe tomography, shot planning, and tree estimation protocols
layered on top, and a conventional Pauli quasiprobability baseline for
comparison.
"""

from .channels import (
    MeasurementSpec,
    MPChannel,
    NumericIntegrityError,
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
from .config import ResourceError, max_dim
from .ensembles import (
    EnsembleKind,
    ProbeSample,
    draw,
    enumerate_ensemble,
    estimator_factor,
    mub_bases,
    reconstruction_identity_check,
    single_shot_estimator,
    two_design_states,
)
from .knitting import (
    CutMode,
    QpdWireCut,
    RescalingFreeCut,
    approx_cut,
    exact_cut,
    pauli_qpd_cut,
    two_block_check,
    z_sector_mp_identity,
)
from .linalg import (
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
from .rng import substream
from .tomography import (
    LearnedObservable,
    LearningTask,
    bernstein_tail,
    clip_norm,
    ensemble_constants,
    learn,
    plan_shots,
)
from .treesim import (
    SeparationInstance,
    ShotPlan,
    TreeCircuit,
    allocate,
    effective_observable,
    estimate_tree,
    estimate_two_layer,
    exact_expectation,
    layer_accuracies,
    make_separation_instance,
    run_separation,
    schrodinger_expectation,
)

__version__ = "0.1.0"

__all__ = [
    "CutMode",
    "DensityOperator",
    "EnsembleKind",
    "HermitianOperator",
    "InvalidInputError",
    "LearnedObservable",
    "LearningTask",
    "MeasurementSpec",
    "MPChannel",
    "NumericIntegrityError",
    "ProbeSample",
    "QpdWireCut",
    "QuantumChannel",
    "RescalingFreeCut",
    "ResourceError",
    "SeparationInstance",
    "ShotPlan",
    "TreeCircuit",
    "adjoint_apply",
    "allocate",
    "apply",
    "apply_mat",
    "approx_cut",
    "bernstein_tail",
    "clip_norm",
    "draw",
    "effective_observable",
    "ensemble_constants",
    "enumerate_ensemble",
    "estimate_tree",
    "estimate_two_layer",
    "estimator_factor",
    "exact_cut",
    "exact_expectation",
    "haar_moment_2",
    "haar_unitary",
    "herm_eig",
    "kron",
    "kron_all",
    "layer_accuracies",
    "learn",
    "make_separation_instance",
    "max_dim",
    "mp_apply",
    "mp_classical",
    "mub_bases",
    "op_norm",
    "partial_trace",
    "pauli_qpd_cut",
    "plan_shots",
    "random_channel",
    "reconstruction_identity_check",
    "run_separation",
    "sample_outcome",
    "schrodinger_expectation",
    "single_shot_estimator",
    "substream",
    "swap_operator",
    "trace_norm",
    "two_block_check",
    "two_design_states",
    "z_sector_mp_identity",
]
