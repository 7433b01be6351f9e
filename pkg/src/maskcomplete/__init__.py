"""Mask-based identifiability and exact completion of low-rank matrices.

Given only the pattern of observed cells, decide whether a generic rank-r
matrix is uniquely recoverable (necessary graph conditions, closability,
a numerical finiteness test), complete it exactly when it is, and compare
against nuclear-norm and rank-fit baselines over random masks.
"""

from .baselines import (
    NuclearNormResult,
    RankFitResult,
    SolverConfig,
    nuclear_norm_complete,
    rank_r_fit,
    rank_r_fit_all,
    success,
)
from .closure import (
    ClosureStep,
    ClosureTrace,
    find_completable_block,
    is_r_closable,
    r_closure,
)
from .completion import (
    CompleteOptions,
    CompletionResult,
    DegenerateBlockError,
    InferredEntry,
    complete,
    solve_block_entry,
    verify_completion,
)
from .experiment import (
    PRESETS,
    ExperimentConfig,
    ExperimentResult,
    emit_csv,
    parse_experiment_csv,
    preset,
    run_experiment,
    to_csv_text,
)
from .fiber import FiberReport, fiber_dimension_test, masking_jacobian, target_dimension
from .graphs import (
    BipartitePartition,
    ConditionReport,
    edge_count_bound,
    edge_count_condition,
    is_connected,
    is_r_connected,
    max_flow,
    min_degree_condition,
    necessary_conditions_report,
    partition_bound_holds,
    partition_search_is_exhaustive,
    search_violating_partition,
)
from .linalg import (
    FactorPair,
    determinant,
    numerical_rank,
    random_factors,
    random_rank_r,
    svd_compact,
)
from .masks import (
    Mask,
    MaskedMatrix,
    MaskFormatError,
    apply_mask,
    mask_from_dense,
    parse_mask_text,
    parse_masked_matrix,
    random_mask,
    serialize_mask_text,
    serialize_masked_matrix,
)

__version__ = "0.1.0"
