"""Delta-constrained Riesz convolution integrals.

Closed forms and Gamma-ratio bounds for the families that have them, a
Monte-Carlo oracle that evaluates every family from its definition, and a
sweep harness that checks the two against each other.
"""

from importlib import metadata as _metadata

from .errors import AccuracyError, DomainError, HyperconvError, NumericalError, StructureError
from .forms import Family, FormSpec, classify, dilation_normalize, make_form

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "AccuracyError",
    "DomainError",
    "Family",
    "FormSpec",
    "HyperconvError",
    "NumericalError",
    "StructureError",
    "classify",
    "dilation_normalize",
    "make_form",
    "__version__",
]
