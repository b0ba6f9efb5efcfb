"""Numerical mirror symmetry for the elliptic curve.

Theta-function section algebras on one side, triangle-weighted Floer
products on the other, and the functor that matches them coefficient by
coefficient.
"""

from .theta import (
    DEFAULT_TRUNCATION,
    ModularParam,
    NonConvergent,
    ThetaChar,
    TruncationCapExceeded,
    TruncationSpec,
    theta_eval,
)

__all__ = [
    "DEFAULT_TRUNCATION",
    "ModularParam",
    "NonConvergent",
    "ThetaChar",
    "TruncationCapExceeded",
    "TruncationSpec",
    "theta_eval",
]

__version__ = "0.1.0"
