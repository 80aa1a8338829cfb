from .grid import (GridHeightField, ProjectionError, admissibility_residual, project_admissible,
                   validate_field)
from .functional import ent_functional
from .maximize import NonConvergence, SolveOptions, SolveReport, init_linear, init_tent, maximize_entropy
from .analysis import (ELResidual, density, euler_lagrange_residual, level_line, limit_surface,
                       square_level_line_oracle, square_oracle, square_oracle_gradient)
