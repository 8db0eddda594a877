"""Shrinkage estimation for exponential-family parameter vectors.

``delta* = X - c b(X) / sqrt(S)`` with ``S = sum b(X_i)^2`` is compared with
the MLE, James-Stein and Hudson estimators by a seeded Monte Carlo risk
engine. The replication loop runs in a compiled kernel when it is built and
in numpy otherwise; see :mod:`expshrink._backend`.
"""
from ._backend import available as available_backends
from ._backend import default_backend
from .distributions import (
    CovarianceSpec,
    sample_exponential,
    sample_gamma,
    sample_normal_corr,
    sample_normal_iid,
)
from .errors import ConfigurationError, DomainError, UnsupportedFamilyError
from .estimators import EstimatorKind, EstimatorSpec, a_star, hudson, james_stein, mle, optimal_c, shrinkage
from .families import (
    EXPONENTIAL,
    GAMMA,
    NORMAL_CORRELATED,
    NORMAL_IID,
    FamilyTag,
    ParameterSpace,
    density,
    s_statistic,
    validate_parameter_space,
)
from .risk import (
    RiskReport,
    Scenario,
    analytic_risk_normal_theta0,
    compare_estimators,
    empirical_risk,
    quadratic_loss,
    risk_difference_bound,
    stein_identity_check,
    theorem_risk_identity_check,
)
from .rng import rng_stream
from .scenarios import ScenarioConfig, build_theta, emit, emit_m_curve, run_scenario
from .special import digamma, gamma_a_star, ln_gamma, m_bound, second_log_moment, trigamma

__version__ = "0.1.0"
