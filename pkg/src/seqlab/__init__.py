"""Penalized least squares in the Gaussian sequence model.

Constraint sets and penalties, exact and iterative solvers for the
penalized LSE, localized Gaussian widths and concentration points,
Monte-Carlo verification of tail/risk/smoothness bounds, Bayes risk
lower bounds, and closed-form minimax-constant certificates.
"""

from .sets import (
    Ball,
    Box,
    ConstraintSet,
    DykstraError,
    FullSpace,
    Intersection,
    L1Ball,
    MonotoneCone,
    Singleton,
    WeightedEllipsoid,
    cube,
    dykstra_project,
    pava,
    set_from_json,
)
from .penalties import (
    L1,
    LinearForm,
    Penalty,
    Quadratic,
    RangePenalty,
    Zero,
    penalty_from_json,
)
from .solver import (
    SolveOptions,
    Solution,
    check_lipschitz,
    objective_value,
    solve_many,
    solve_penalized_lse,
)
from .width import (
    BracketError,
    NoiseBatch,
    TThetaResult,
    WidthProfile,
    estimate_m,
    find_t_theta,
    inner_sup,
    inner_sup_batch,
    width_profile,
)
from .risk import (
    EstimatorSpec,
    RiskReport,
    SmoothnessReport,
    TailReport,
    check_risk_bound,
    check_smoothness,
    check_tail_bound,
    estimator_from_json,
    risk_bound,
    simulate_risk,
    tail_bound,
    tail_moment_integral,
)
from .bayes import (
    BoundReport,
    GridPrior,
    Pushforward,
    TwoPoint,
    avg_risk_under_prior,
    bayes_oracle_1d,
    chi_sq_gaussian,
    lecam_two_point,
    prior_from_json,
    sample_pushforward_prior,
    small_ball_lower_bound,
)
from .cstar import (
    CSTAR_LOWER_TARGET,
    OCH,
    HardCaseConstants,
    certificate_report,
    clip_risk,
    clip_risk_lower_bound,
    easy_case_constant,
    hard_case_constant,
    normalized_ratio_bound,
    sufficiency_check,
)

__version__ = "0.1.0"
