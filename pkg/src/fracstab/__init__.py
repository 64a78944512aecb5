"""Finite-time stability analysis of fractional-order systems with multiple state delays."""

from fracstab.errors import (
    FracStabError,
    NumericalError,
    ParseError,
    ValidationError,
)
from fracstab.gronwall import (
    BoundInputs,
    GronwallBound,
    gronwall_ml_bound,
    gronwall_series_bound,
    picard_oracle,
    uniform_grid,
)
from fracstab.io import emit_csv, load_system, parse_system, serialize_system
from fracstab.linalg import max_row_sum, sigma_bound, sigma_max, vec_norm_max
from fracstab.mittag_leffler import MLResult, mittag_leffler, ml_eval
from fracstab.solver import (
    HistoryFn,
    InputSignal,
    Nonlinearity,
    SystemSpec,
    Trajectory,
    simulate_batch,
    solve_fdde,
    trajectory_sup_norm,
)
from fracstab.stability import (
    CriterionReport,
    StabilityParams,
    Variant,
    criterion_liu_linear,
    criterion_special_case,
    criterion_theorem31,
    derive_constants,
    verify_by_simulation,
)

__version__ = "0.1.0"
