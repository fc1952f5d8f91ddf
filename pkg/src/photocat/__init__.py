"""Truncated Fock-space simulation and optimization of photon-catalysis
state engineering: exact displaced photons, cascaded catalysis into
superpositions of squeezed vacuum, and PNR breeding into grid code states."""

__version__ = "0.1.0"

from .fock import (
    DEFAULT_CUTOFF,
    DensityOperator,
    FockVector,
    ImpossibleOutcomeError,
    ResourceError,
    TruncationError,
    TruncationWarning,
    apply_loss,
    apply_operator,
    fidelity,
    fock_vector,
    load_state,
    partial_trace,
    pnr_distribution,
    project_pnr,
    save_state,
    state_from_dict,
    state_to_dict,
    tensor,
    vacuum,
)
from .ops import (
    BeamsplitterParam,
    beamsplitter_matrix,
    coherent_vector,
    displaced_fock_vector,
    displacement_matrix,
    displacement_through_squeeze,
    rotation_matrix,
    squeeze_matrix,
    squeeze_vector,
)
from .catalysis import (
    CascadeResult,
    CatalysisStep,
    cascade,
    cascade_success_prob,
    cascaded_closed_form,
    catalyze_step,
    closed_form_amplitudes,
    displaced_photon_fidelity,
    fock_filter_step,
    lossy_optimal_params,
    paris_displacement_mixture,
)
from .targets import (
    TargetSpec,
    equivalent_cat,
    gkp_hex,
    gkp_square,
    scs_vector,
    squeezing_db,
    ssv_fidelity_analytic,
    ssv_vector,
)
from .breeding import (
    BreedConfig,
    breed,
    breed_hex,
    breed_outcome_distribution,
    breed_sweep,
    homodyne_project,
)
from .optimize import (
    AcceptList,
    ExperimentResult,
    OptimizationProblem,
    OptimizationResult,
    SimplexConfig,
    nelder_mead,
    optimize_cascade,
    threshold_success,
)
from .wigner import PhaseGrid, hermite_basis, negativity, wigner_grid, wigner_point
