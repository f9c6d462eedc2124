"""Regularity partitions: exact irregularity, refinement, tower constructions and spectral checks."""

from .construction import (
    ConstructionParams,
    ConstructionTrace,
    build,
    load_trace,
    plan_paper_params,
    residual_report,
    save_trace,
    verify_construction,
)
from .diagnostics import color_trace, counting_report, refinement_closeness
from .errors import (
    CapacityError,
    ConstructionInfeasible,
    InputError,
    NumericalError,
    RegimeError,
    RegTowerError,
)
from .graph import (
    VertexPartition,
    WeightedGraph,
    atoms_from_subsets,
    common_refinement,
    density,
    edge_sum,
    is_refinement,
    mean_square_density,
)
from .irregularity import (
    IrregularityWitness,
    coarsen_bound,
    eps_regular_check,
    irreg_exact,
    irreg_partition,
    pair_lower_bound,
)
from .realization import max_deviation_exact, perturbation_irreg_gap, round_to_unweighted
from .refine import (
    RefinementRun,
    TowerCounter,
    parts_bound,
    refine_step,
    regularize,
    tower,
    tower_height_upper,
)
from .spectral import blow_up, mixing_report, top_singular_value, trace_m2_bound

__version__ = "0.1.0"
