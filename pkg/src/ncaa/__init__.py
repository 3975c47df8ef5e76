"""Near-convex archetypal analysis: solvers, baselines, metrics, synthetic data.

The factorization X ~ Y A H keeps archetypes interpretable (near-convex
combinations of selected data columns) while the near-convexity radius is
tuned automatically against the reconstruction error.
"""

from .baselines import MinVolConfig, minvol_nmf, snpa_unmix
from .errors import (
    ConfigError,
    DataError,
    GenerationError,
    MetricError,
    NcaaError,
    NumericFailure,
    ShapeError,
)
from .evaluation import EvalReport, evaluate, hungarian, mrsa
from .fpgm import FpgmConfig, fpgm_solve, grad_A, grad_H
from .linalg import (
    as_matrix,
    column_mean,
    fro_norm_sq,
    matmul,
    rng_stream,
    spectral_norm_sq_upper,
)
from .matio import load_matrix, save_matrix
from .projections import (
    SUM_AT_MOST_ONE,
    SUM_EQUALS_ONE,
    EpsSimplexSpec,
    project_columns,
    project_eps_simplex,
    project_subsimplex,
)
from .selection import SelectionResult, hc_select, snpa_select
from .solver import (
    NcaaModel,
    TunerConfig,
    archetypes,
    bcd_block,
    expand_to_Z,
    fine_tune,
    init_factors,
    load_model,
    residual_sq,
    save_model,
    tune_epsilon,
)
from .synthdata import SyntheticInstance, SyntheticSpec, dirichlet_column, generate

__version__ = "0.1.0"
