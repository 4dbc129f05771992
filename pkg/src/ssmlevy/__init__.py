"""Eigenfunctions of positive self-similar Markov processes with no positive jumps.

The core objects are the Laplace exponent ``psi`` of the underlying
spectrally negative Levy process, the power series ``I_{alpha,psi}`` built
from it, and the decreasing eigenfunction ``N``. Transforms of first-passage
times, of the exponential functional and of related laws are formed from
these; :mod:`ssmlevy.montecarlo` checks them by simulation.
"""

from .eigenfunction_series import (
    AsymptoticProfile,
    Eigenfunction,
    LogValue,
    c_theta,
    coefficients,
    eigenfunction,
    eval_I,
    eval_I_derivative,
    eval_N,
    log_I,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    InversionUnstable,
    QuadratureError,
    RegimeError,
    RootNotBracketed,
    SimulationError,
    SSMError,
)
from .levy_exponent import (
    CharacteristicExponent,
    JumpPiece,
    LevyTriplet,
    apply_generator,
    brownian_drift,
    cramer_root,
    custom,
    esscher_shift,
    from_spec,
    mean,
    phi_inverse,
    pochhammer,
    psi_eval,
    stable,
)
from .transforms import (
    entrance_law_laplace,
    expfun_laplace,
    fpt_joint_laplace,
    fpt_up_laplace,
    hartman_ratio,
    id_laplace,
    levy_fpt_functional_laplace,
    selfdecomp_laplace,
    wolfe_levy_exponent,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticProfile", "Eigenfunction", "LogValue", "c_theta", "coefficients", "eigenfunction", "eval_I",
    "eval_I_derivative", "eval_N", "log_I",
    "ConfigError", "ConvergenceError", "InversionUnstable", "QuadratureError", "RegimeError",
    "RootNotBracketed", "SimulationError", "SSMError",
    "CharacteristicExponent", "JumpPiece", "LevyTriplet", "apply_generator", "brownian_drift", "cramer_root",
    "custom", "esscher_shift", "from_spec", "mean", "phi_inverse", "pochhammer", "psi_eval", "stable",
    "entrance_law_laplace", "expfun_laplace", "fpt_joint_laplace", "fpt_up_laplace", "hartman_ratio",
    "id_laplace", "levy_fpt_functional_laplace", "selfdecomp_laplace", "wolfe_levy_exponent",
]
