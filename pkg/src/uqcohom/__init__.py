"""Numerical Hochschild cohomology of the universal unitary quantum groups U_Q^+."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .spectrum import (  # noqa: E402,F401
    BlockSpectrum,
    block_project,
    build_spectrum,
    is_geometric_triple,
    partial_trace,
    slq_dimension,
    slq_residuals,
)
from .representations import (  # noqa: E402,F401
    OperatorMatrix,
    epsilon_rep,
    infdim_rep,
    keyrep,
    random_block_unitary_rep,
    relation_residuals,
    suq2_generators,
)
from .one_cocycles import (  # noqa: E402,F401
    OneCocycle,
    cocycle_constraint_operator,
    derive_w,
    h1_dimension,
    solve_cocycle_space,
    verify_one_cocycle,
)
from .q_recurrence import (  # noqa: E402,F401
    RecurrenceParams,
    build_case1_vectors,
    build_case2_vectors,
    case1_params,
    case2_params,
    corner_pattern_check,
    is_square_summable,
    ratio_limit,
    run_recurrence,
    verify_entry_systems,
)
from .two_cocycles import (  # noqa: E402,F401
    TwoCocycleTable,
    coboundary_from_rep,
    compute_AB,
    construct_psi,
    cup_product,
    defect,
    embed_table,
    is_coboundary,
)
from .pipeline import (  # noqa: E402,F401
    H2Result,
    PipelineConfig,
    assemble_basis,
    compute_h2,
    h2_dimension,
    nogo_experiment,
    select_triples,
    verify_independence,
)
