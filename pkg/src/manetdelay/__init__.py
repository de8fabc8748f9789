"""Local-delay analysis of slotted Aloha in Poisson networks.

Closed-form and quadrature mean delays, Palm-calculus Monte-Carlo
estimators, heavy-tail diagnostics, and phase-transition classification.
"""

__version__ = "0.1.0"

from .models import (
    BipolarReceiver,
    ConfigError,
    ConstantNoise,
    CustomNoise,
    DeterministicFading,
    ExponentialNoise,
    IpnrReceiver,
    LogNormalFading,
    MnnReceiver,
    PathLoss,
    PoissonGridReceiver,
    RayleighFading,
    ScenarioConfig,
    Variability,
    Violation,
    WeibullFading,
    ZeroNoise,
    validate,
)
from .configfile import read_scenario, read_sweep, scenario_from_dict
from .quadrature import QuadratureError
from .analytic import (
    DegenerateRateError,
    DelayValue,
    NoAnalyticRuleError,
    PhaseVerdict,
    UnsupportedModelError,
    contention_coefficient,
    contention_constant,
    empty_ball_arc_integral,
    high_mobility_coefficient,
    interference_factor_inr,
    interference_factor_mnn,
    interference_tail_integral,
    mean_delay,
    mean_delay_bipolar,
    mean_delay_bounded_receiver,
    mean_delay_high_mobility_ipnr,
    mean_delay_ipnr,
    mean_delay_mnn,
    mean_delay_noise_limited,
    mnn_contention_coefficient,
    noise_factor,
    phase_classify,
    shannon_delay_interference_free,
)
from .simulate import (
    Censored,
    DelayEstimate,
    DivergenceReport,
    PalmSample,
    SlotOutcome,
    conditional_success_prob,
    default_window_radius,
    divergence_diagnostic,
    estimate_delay_ccdf,
    estimate_mean_delay,
    estimate_shannon_delay,
    guard_radius,
    local_delay,
    palm_success_probs,
    run_slots,
    sample_local_delays,
    sample_palm,
    stream,
)
