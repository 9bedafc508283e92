"""Dimension laboratory for images of self-similar random fields.

Simulate fractional Brownian motion and its stable, Lévy and Rosenblatt
cousins on [0, 1], push Cantor-type sets and their natural measures through
the paths, and estimate Hausdorff, packing and profile dimensions of the
results.
"""
from .errors import BudgetExceeded, ConstructionError, ParameterError, SimulationError
from .estimators import (DimEstimate, LocalExponentField, box_counts, box_dimension,
                         hausdorff_dim_cloud, lower_upper_box, measure_local_dims)
from .fields import (FieldSpec, SamplePath, image_measure, image_points, simulate, simulate_fbm,
                     simulate_hfsm, simulate_lfsm, simulate_rhflm, simulate_rosenblatt, vectorize)
from .geometry import (CantorSpec, DiscreteMeasure, Grid, PointCloud, ball_mass, cantor_set,
                       make_dyadic_grid, two_phase_cantor, uniform_measure, point_mass)
from .sampling import Seed, StableParams, lepage_terms, poisson_cloud, sample_sas

__version__ = "0.1.0"
