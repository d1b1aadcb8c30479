"""Boundary integral eigen-solver for Dirichlet billiards."""

from .geometry import (Arc, BoundaryCurve, Line, curve_from_description, make_circle,
                       make_cone, make_quarter_stadium)
from .kernel import assemble_kernel, discretize, node_count
from .solver import SpectrumScanner, eigen_scan, smallest_singular, weyl_count
from .states import Eigenstate, EigenstateSet, eigenfunction, ensemble_of_states

__all__ = [
    "Arc", "BoundaryCurve", "Line", "curve_from_description", "make_circle", "make_cone",
    "make_quarter_stadium", "assemble_kernel", "discretize", "node_count",
    "SpectrumScanner", "eigen_scan", "smallest_singular", "weyl_count",
    "Eigenstate", "EigenstateSet", "eigenfunction", "ensemble_of_states",
]
