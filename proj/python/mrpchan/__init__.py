"""Mutual information of Markov renewal channels."""

from ._core import (
    CapabilityError,
    Error,
    InputError,
    Model,
    NumericError,
    __version__,
    builtin_models,
    contour,
    gene_f_tau,
    mi_exact,
    mi_mc,
    mir,
    simulate,
)

__all__ = [
    "CapabilityError",
    "Error",
    "InputError",
    "Model",
    "NumericError",
    "__version__",
    "builtin_models",
    "contour",
    "gene_f_tau",
    "mi_exact",
    "mi_mc",
    "mir",
    "simulate",
]
