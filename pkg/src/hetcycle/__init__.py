"""Toolkit for a periodically forced heteroclinic network in R^3.

Simulation of the suspended flow with section-event detection, analytic
local/global transition maps on rescaled charts, the averaged return map
and its fixed points, and scaling experiments (high-frequency convergence,
logarithmic period growth) with a reproducible CLI on top.
"""
from .analysis import (
    CalibrationResult,
    ComparisonRow,
    ConvergenceReport,
    FitResult,
    FixedPointResult,
    GridSpec,
    MapComparison,
    PeriodScan,
    analytic_vs_numeric,
    calibrate_a,
    convergence_study,
    find_fixed_point_h2,
    fixed_point_w,
    linear_fit,
    period_scan,
    periodic_orbit_period,
)
from .errors import (
    ConfigError,
    DomainError,
    GridEmpty,
    HetcycleError,
    InsufficientData,
    IntermediateEscape,
    InvariantViolation,
    MaxTimeExceeded,
    NoPositiveFixedPoint,
    NonConvergence,
    NonPositiveExit,
    NotOnSection,
    QuadratureFailure,
    SequenceViolation,
    StepFailure,
    UnsupportedForcing,
)
from .integrator import (
    EventHit,
    EventSpec,
    IntegratorConfig,
    NumericalReturn,
    Trajectory,
    default_max_time,
    integrate,
    numerical_return_map,
    section_events,
)
from .maps import (
    AnalyticReturn,
    FlightTimes,
    ForcingIntegrals,
    KIntegral,
    K1_closed_form,
    K2_closed_form,
    K_quadrature,
    compose_return,
    contraction_coefficient,
    flight_time_T1,
    flight_times,
    global_map_minus_to_plus,
    global_map_plus_to_minus,
    h2_scalar,
    h3_coefficients,
    linear_exit_time_vminus,
    local_map_vminus,
    local_map_vplus,
    mu_kernel,
    reduced_h,
    sine_kernel,
)
from .model import (
    Forcing,
    Params,
    State,
    apply_symmetry,
    circle_distance,
    custom_forcing,
    equilibrium,
    eval_field,
    jacobian_at_equilibrium,
    lie_derivative_g,
    saddle_value,
    sine_forcing,
    wrap_phase,
)
from .report import (
    Check,
    format_sig,
    line_plot_script,
    render_plot,
    validate_plot_script,
    write_csv,
    write_plot_script,
    write_summary,
)
from .sections import (
    SectionId,
    SectionPoint,
    from_ambient,
    rescale_epsilon,
    rescale_epsilon_inverse,
    rescale_params,
    to_ambient,
    validate_section_point,
)

__version__ = "0.1.0"
