"""Bergman-space machinery on generalized Hartogs domains.

Subpackages cover the domain geometry, the orthogonal monomial basis,
quadrature on the product model, the Bergman kernel and Green function,
the weighted integral estimates, the Schur-test verifier, and the
Toeplitz operator lab with its exact phase classification.
"""

from ._backend import BACKEND_NAME
from .domain import CPoint, DomainSpec, Frame, make_domain

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "CPoint",
    "DomainSpec",
    "Frame",
    "make_domain",
    "__version__",
]
