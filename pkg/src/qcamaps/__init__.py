"""Pseudo-random unitary maps on qubit chains/rings and their randomness statistics."""

from .entanglement import (
    haar_average_q,
    haar_q_reference,
    meyer_wallach_q,
    meyer_wallach_q_many,
    q_convergence,
    q_distribution,
)
from .operators import (
    CapacityError,
    CouplingSchedule,
    MapConfig,
    RotationAngles,
    RotationSchedule,
    Topology,
    build_map,
    commutator_maxnorm,
    config_warnings,
    map_iteration_snapshots,
    mirror_block_dims,
    mirror_block_fractions,
    mirror_permutation,
    nnc_unitary,
    rotation_plan,
    species_assignment,
    species_rotation_layer,
    su2_rotation,
    unitarity_defect,
)
from .refdist import (
    REFERENCE_NAMES,
    GofResult,
    ReferencePdf,
    ks_test,
    ks_two_sample,
    reference_pdf,
    sample_coe,
    sample_cue,
)
from .spectral import (
    SpectralData,
    dephasing_perturbation,
    eigendecompose,
    eigvec_elements,
    fidelity_decay,
    log_linear_fit,
    spacings,
    spectral_data,
)

__version__ = "0.1.0"
