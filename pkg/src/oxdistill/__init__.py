"""Bell-diagonal entanglement purification: closed-form recurrences, a dense
density-matrix reference, and experiment drivers."""

from .bell import (
    IDEAL,
    MAXIMALLY_MIXED,
    BellPopulations,
    CorrelationTriple,
    DomainError,
    LocalRotation,
    NotBellDiagonalError,
    apply_local_rotation,
    bell_populations,
    canonicalize,
    degree_of_separability,
    fidelity,
    from_density_matrix,
    is_separable,
    make_binary,
    make_isotropic,
    make_werner,
    raw_separability,
    to_density_matrix,
)
from .protocol import (
    NOISELESS,
    AlwaysDiscardedError,
    NoiseModel,
    PurificationTrace,
    StepResult,
    StopRule,
    Variant,
    analytic_step,
    binary_step,
    check_purifiable,
    iterate,
    pair_cost,
    separability_closed_form,
    separability_step,
)

__version__ = "0.1.0"
