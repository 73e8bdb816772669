"""Block-randomized regular tournaments and expected spanning-copy counts."""

from .bounds import (
    GeometricMeanBound,
    ParameterSolution,
    RelabelCheck,
    amgm_bound,
    inequalities_hold,
    kreg_boost_formula,
    solve_parameters,
    verify_relabel_probabilities,
)
from .counting import (
    BlockAverages,
    CopyBlockStats,
    CopyKernel,
    EstimateReport,
    baseline_expected_copies,
    copy_block_stats,
    copy_probability,
    count_hamilton_cycles,
    count_hamilton_paths,
    count_labeled_copies,
    empirical_block_averages,
    estimate_expected_copies,
    exact_block_averages,
    exact_copy_summary,
    exact_expected_copies,
    typical_closed_form,
)
from .designs import (
    Block,
    BlockKind,
    Decomposition,
    ValidationReport,
    adjusted_decomposition,
    backtracking_kt_decomposition,
    decomposition_from_json,
    extend_to_even,
    projective_plane_decomposition,
    steiner_triple_system,
    validate,
)
from .errors import (
    BudgetExceededError,
    CongruenceError,
    InfeasibleAtDeskScale,
    InvalidDecompositionError,
    InvalidOrientationError,
    InvalidTournamentError,
    OrientBoostError,
    RejectionBudgetError,
)
from .orientations import (
    Orientation,
    OrientationFlags,
    OrientationStats,
    Tournament,
    classify,
    consistency_check,
    make_pattern,
    orientation_from_edges,
    orientation_from_json,
    orientation_from_text,
    random_orientation,
    random_tournament,
    stats,
    tournament_from_edges,
    tournament_from_hex_text,
    tournament_from_json,
    transitive_tournament,
)
from .sampling import (
    BaseTournaments,
    SampleSeed,
    circulant_regular_tournament,
    enumerate_support,
    quadratic_residue_tournament,
    sample,
    support_size,
)

__version__ = "0.1.0"
