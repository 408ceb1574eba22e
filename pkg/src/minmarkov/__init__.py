"""Minimum information Markov chains with prescribed dependence and marginal."""
__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConvergenceError,
    DomainError,
    InputError,
    MinMarkovError,
    ResourceError,
    UnattainableMomentsError,
    UnobservedStateError,
    VerificationError,
)
from .statespace import StateSpace, lift  # noqa: E402
from .mininfo import (  # noqa: E402
    MinInfoResult,
    MinInfoSpec,
    binomial_marginal,
    construct,
    construct_first_order,
    construct_higher_order,
    inar1_dependence,
    inar2_dependence,
    scaling_factors,
)
from .inference import FitResult, ParametricModel, fit  # noqa: E402
from .sampling import TimeSeries, sample_path  # noqa: E402
from .estimators import MinInfoMarkovChain, MinInfoMarkovEstimator  # noqa: E402

__all__ = [
    "ConvergenceError",
    "DomainError",
    "FitResult",
    "InputError",
    "MinInfoMarkovChain",
    "MinInfoMarkovEstimator",
    "MinInfoResult",
    "MinInfoSpec",
    "MinMarkovError",
    "ParametricModel",
    "ResourceError",
    "StateSpace",
    "TimeSeries",
    "UnattainableMomentsError",
    "UnobservedStateError",
    "VerificationError",
    "binomial_marginal",
    "construct",
    "construct_first_order",
    "construct_higher_order",
    "fit",
    "inar1_dependence",
    "inar2_dependence",
    "lift",
    "sample_path",
    "scaling_factors",
]
