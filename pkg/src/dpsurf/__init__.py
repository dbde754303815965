"""Balance equations and near-limit meshes for doubly periodic minimal surfaces.

Configurations of points on copies of C*, their forces and Jacobians, the
catalog of balanced examples, the limit period problem and approximate
meshes of the surfaces they open up into.
"""

__version__ = "0.1.0"

from .catalog import (CATALOG, build_alternating, build_double_handles, build_handles,
                      build_stacked, build_wei23, combine, default_catalog, from_catalog,
                      hypergeom_poly, poly_roots)
from .config import (Configuration, ForceReport, force, force_minus, force_plus, force_report,
                     force_vector, from_points, genus, level_points, mutual_force, point_at,
                     relabel, scale)
from .errors import (AssemblyError, ContourError, DegenerateConfigurationError, DegreeDropError,
                     GridError, HypothesisError, MultipleZeroError, PoleEvaluationError,
                     QuadratureError, RootFindingError, UnbalancedConfigurationError)
from .meshgen import MeshParams, SurfaceMesh, assemble_surface, level_patch, neck_patch
from .objio import export_obj, read_obj
from .solver import (JacobianReport, SolveOutcome, canonicalize, force_jacobian,
                     is_roots_of_unity_class, nondegeneracy_rank, solve_balance)
from .weierstrass import (LimitVerification, ParameterVector, evaluate_limit, limit_F,
                          residue_oracle, x_from_config)
