"""Affine random walks ``X_{n+1} = a X_n + b_n`` modulo ``q``: entropy, spectra and mixing."""
__version__ = "0.1.0"

from .measures import CyclicDistribution, LatticeMeasure, StepLaw  # noqa: E402
from .walk import CapExceeded, WalkParams, evolve_exact, evolve_mod, point_mass  # noqa: E402

__all__ = [
    "__version__",
    "StepLaw",
    "LatticeMeasure",
    "CyclicDistribution",
    "WalkParams",
    "CapExceeded",
    "evolve_exact",
    "evolve_mod",
    "point_mass",
]
