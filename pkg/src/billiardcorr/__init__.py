"""Two-point correlations of boundary-adapted random waves in billiards.

Subpackages and modules:

``specfun``      J0, Y0 (and order 1) in double precision
``symmetry``     isometries, the dihedral wedge group, corridor image lattices
``randwave``     random plane-wave fields and their boundary-adapted projections
``correlation``  closed-form and ensemble correlation grids, error metric, angular averages
``bim``          boundary integral eigen-solver for Dirichlet billiards
``cli``          command-line front end
"""

__version__ = "0.1.0"

from .correlation import (CorrelationGrid, RadialProfile, angular_average, corridor_mode_sum,
                          corridor_theory, eigenstate_correlation, empirical_correlation,
                          error_metric, mean_theory, randwave_correlation, theory_correlation)
from .randwave import (FieldGrid, PlaneWaveSum, evaluate_adapted, evaluate_free,
                       sample_free_wave, sample_grid, sample_wave)
from .specfun import bessel_j0, bessel_j1, bessel_y0, bessel_y1
from .symmetry import (ImageSet, Isometry, corridor_cell_group, corridor_images,
                       wedge_group)

__all__ = [
    "__version__", "CorrelationGrid", "RadialProfile", "angular_average", "corridor_mode_sum",
    "corridor_theory", "eigenstate_correlation", "empirical_correlation", "error_metric",
    "mean_theory", "randwave_correlation", "theory_correlation", "FieldGrid", "PlaneWaveSum",
    "evaluate_adapted", "evaluate_free", "sample_free_wave", "sample_grid", "sample_wave",
    "bessel_j0", "bessel_j1", "bessel_y0", "bessel_y1", "ImageSet", "Isometry",
    "corridor_cell_group", "corridor_images", "wedge_group",
]
