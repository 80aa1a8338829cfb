"""Bead model toolkit: diagrams, tableaux, local entropy, limit-shape solver, dimers."""
__version__ = "0.1.0"

from .kernels import BACKEND
from .shapes import (BoundaryCondition, DiagramProfile, boundary_from_profile, parse_shape,
                     profile_from_partitions, square_profile, validate)
from .entropy import (ent, ent_tilde, free_energy, legendre_surface_tension, lobachevsky,
                      scaled_dimer_entropy)
from .tableaux import (BeadConfiguration, Tableau, beads_to_tableau, count_syt, sample_syt,
                       tableau_to_beads)
from .solver import GridHeightField, SolveOptions, SolveReport, maximize_entropy
from .dimer import (TallRegion, TorusParams, count_tilings_tall_region, torus_log_partition,
                    volume_limit_check)
