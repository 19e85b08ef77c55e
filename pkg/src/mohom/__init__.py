"""Homogenization of nonlinear monotone elliptic operators with
generalized Orlicz growth: fine-scale and periodic cell solvers,
effective operator tabulation, and two-scale convergence diagnostics.
"""

from .fem import DiscreteField, Mesh, MeshError, build_mesh, integrate
from .nfunc import (
    NFunction,
    catalog_nfunctions,
    check_delta2,
    check_young,
    conjugate_eval,
    luxemburg_norm,
    make_nfunction,
    modular,
)
from .opcat import (
    InversionError,
    MonotoneOperator,
    catalog_operators,
    check_monotone,
    estimate_coercivity,
    invert_A,
    make_operator,
)
from .msolve import SolveError, SolverSettings, SolveResult, solve_dirichlet, solve_dual_1d
from .cell import (
    CellSolution,
    HomogTable,
    check_Ahat_structure,
    eval_f,
    eval_hstar,
    interp_Ahat,
    load_table,
    save_table,
    solve_cell,
    tabulate_Ahat,
)
from .unfold import (
    TwoScalePoint,
    check_unfolding_identity,
    compose,
    corrector_identification,
    floor_decompose,
    weak_two_scale_pairing,
)
from .harness import ExperimentConfig, ConfigError, load_config, run_checks, run_sweep

__version__ = "0.1.0"
