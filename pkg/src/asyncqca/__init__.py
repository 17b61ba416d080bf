"""Asynchronous quantum cellular automaton with an absorbing state.

Brickless (1+1)-dimensional automaton whose row update interpolates between a
classical contact-process-like cellular automaton and a coherent branching
dynamics, with single-site mean-field analysis, exact small-system evolution,
a classical sampling baseline, and the rate dictionary to the quantum contact
process.
"""

from .params import GateParams, ParameterError, standard_params
from .gates import build_async_gate, build_sync_gate, commutator_norm, unitarity_defect
from .meanfield import (
    MFCoefficients,
    MFState,
    MeanFieldError,
    StationaryResult,
    coefficients,
    mf_step_density,
    mf_step_full,
    stationary,
)
from .exact import (
    CapacityError,
    EvolutionConfig,
    RowDensity,
    RowObservables,
    StateError,
    evolve,
    initial_row,
    order_sensitivity,
    parse_pattern,
    step_dense,
    step_trajectory,
)
from .classical import (
    CPRates,
    SampleStatistics,
    cp_mf_ode,
    ct_rates_from_probs,
    pca_step,
    sample_statistics,
    target_occupation_prob,
    transition_matrix,
)
from .qcp import QCPRates, UndefinedRatioError, g_ratio, map_qca_to_qcp, qcp_coefficients
from .analysis import (
    BracketError,
    FitInvalidError,
    PhaseDiagram,
    TransitionReport,
    classify_transition,
    critical_contour,
    find_lambda_star,
    fit_mf_beta,
    g_along_critical,
    sweep,
)

__version__ = "0.1.0"
