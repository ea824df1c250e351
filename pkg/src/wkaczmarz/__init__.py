"""Weighted randomized Kaczmarz solvers for consistent linear systems.

Rows are sampled with probability proportional to ``|<a_i, x_k> - b_i|^p``.
``p -> 0`` recovers uniform randomized Kaczmarz and ``p -> inf`` the
maximal-correction rule.
"""

from .analysis import (
    RateReport,
    SpectralInfo,
    jp,
    jp_grad,
    jp_inf_estimate,
    rk_rate,
    rk_sv_identity_check,
    smallest_singular,
)
from .errors import *  # noqa: F401,F403
from .harness import ExperimentSpec, SummaryRow, report_bounds, run_experiment
from .linsys import (
    NormalizedSystem,
    gen_gaussian,
    gen_gaussian_shifted,
    gram,
    load_system,
    normalize_system,
    residual,
)
from .sampling import (
    Cyclic,
    MaxCorrection,
    NormWeighted,
    Uniform,
    Weighted,
    WeightProfile,
    effective_argmax_mass,
    parse_rule,
    sample_index,
    weights,
)
from .solver import (
    ResidualStrategy,
    SolveConfig,
    SolverState,
    TraceRecord,
    expected_next_error_sq,
    init_state,
    iterate,
    solve,
    step,
)

__version__ = "0.1.0"
