"""Edge dynamics of beta-ensembles: Airy functions, samplers, SDEs, experiments."""

from ._core import (  # noqa: F401
    AiryRangeError,
    ConfigError,
    IoError,
    NumericalError,
    PreconditionError,
    airy_eval,
    airy_log_derivative,
    airy_zeros,
    check_airy_like,
    evolve,
    experiment_names,
    run_experiment,
    sample,
    scaling,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
