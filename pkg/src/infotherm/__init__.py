"""State functions, quasi-static processes, and cycle laws for asymptotic
statistical inference, with a budgeted-acquisition optimiser, a driven
adaptation model, and Monte Carlo validation tools."""

from .adaptation import (
    AdaptationParams,
    AdaptationTriple,
    FixedPoints,
    IngestReport,
    InequalityVerdict,
    SlopeFit,
    corpus_report,
    cycle_balance,
    firing_rate,
    fixed_points,
    ingest_triples,
    loglog_slope,
    m_of_t,
    model_triples,
    sqrt_law_triples,
    universal_inequality_check,
)
from .control import (
    BoundReport,
    BudgetProblem,
    DpSolution,
    OptimalTrajectory,
    StationarityResult,
    dp_oracle,
    entropy_production_stationarity,
    global_efficiency_bound,
    max_info_bound,
    optimal_info_gain,
    solve_optimal,
)
from .cycles import (
    ConstitutiveScaling,
    PiecewiseLinearStimulus,
    SamplingDynamics,
    SecondLawVerdict,
    StimulusLoop,
    cyclic_information,
    greens_information,
    mixed_derivative,
    random_stimulus_loop,
    second_law_check,
    simulate_driven_cycle,
    supermodularity_defect,
)
from .errors import (
    AdmissibilityError,
    DegenerateEnsembleError,
    DegenerateStateError,
    EfficiencyUndefinedError,
    EmptyInputError,
    InfeasibleBudgetError,
    InfeasibleProcessError,
    InfothermError,
    InsufficientDataError,
    InsufficientVariationError,
    InvalidConventionError,
    InvalidStateError,
    NoFeasiblePathError,
    NonMonotoneScalingError,
    NoStationaryDirectionError,
    NotACycleError,
    NotClosedError,
    NotSimpleLoopError,
    UndefinedRatioError,
)
from .montecarlo import (
    EntropyValidation,
    NormalityReport,
    SamplingSpec,
    ScalingPoint,
    estimate_entropy,
    normality_check,
    simulate_estimator,
    validate_entropy_formula,
    validate_variance_scaling,
)
from .paths import (
    ADIABATIC,
    ISOCHORIC,
    ISOTHERMAL,
    CyclePath,
    LoopClosure,
    ProcessPath,
    cycle_closure_check,
    first_law_residual,
    information_gain,
    make_process,
    make_rectangle_cycle,
    random_cycle,
    random_monotone_path,
    resample,
    reversible_entropy_flux,
    sampling_work,
    susceptibility_flux,
)
from .state import (
    MUTUAL_INFO,
    RAW,
    DegenerateStateWarning,
    InferenceState,
    NoiseModel,
    Partials,
    QuasiPotentials,
    efficiency,
    entropy,
    mmse,
    partials,
    quasi_potentials,
    theta,
    theta_floor,
    theta_suboptimal,
)

__version__ = "0.1.0"
