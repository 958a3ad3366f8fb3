"""Nonconforming virtual element solver on polygonal meshes with curved edges.

The library discretizes general second-order elliptic problems

    -div(a grad u) + div(b u) + c u = f,    u = g on the boundary,

with polynomial orders k = 1..4 on meshes whose edges may be analytic curve
segments.  Shape functions are never evaluated: all operators are projection
matrices computed from edge and bulk moments.
"""

from .basis import (CellBasis, EdgeBasis, cell_basis, divergence_vector_basis,
                    dx_coefficient_map, dy_coefficient_map, edge_basis,
                    eval_cell_basis, eval_edge_basis, grad_cell_basis,
                    laplacian_cell_basis, laplacian_coefficient_map,
                    monomial_count, monomial_exponents)
from .cases import (CaseSetup, ExactSolution, case1, case2, case3, get_case,
                    polynomial_case)
from .curves import (CurveParam, REGISTRY_NAMES, affine_curve, graph_curve,
                     make_curve, validate_curve)
from .errors import (CoefficientError, GenerationError, MeshError,
                     MeshFormatError, NcvemError, NumericError,
                     QuadratureError, SolverError)
from .forms import (CoefficientField, LocalSystem, assemble_local,
                    coefficient_field, constant_coefficients,
                    reference_h1_gram, stability_ratio)
from .generators import (generate_concave_mesh, generate_interface_mesh,
                         generate_square_quad_mesh, generate_voronoi_mesh,
                         map_mesh_to_curved_domain)
from .harness import (ConvergenceRecord, LevelResult, compute_errors,
                      default_levels, fit_slope, manufactured_residual,
                      rates_table, record_to_csv, report, run_case,
                      slopes_pass)
from .mesh import (BOUNDARY, INTERFACE, INTERIOR, Cell, Edge, Mesh,
                   MeshQualityReport, meshes_equal, read_mesh, validate_mesh,
                   write_mesh)
from .projectors import (EdgeProjection, LocalDofLayout, ProjectorPack,
                         build_all_packs, build_projector_pack,
                         dofs_of_polynomial, edge_l2_projection,
                         gradient_l2_projector, ritz_galerkin_projector,
                         scalar_l2_projector)
from .quadrature import (CellRule, EdgeRule, cell_rule, curve_excess,
                         edge_rule, gauss_legendre)
from .solve import (DofMap, SolveResult, apply_dirichlet, assemble_and_solve,
                    assemble_global, build_dof_map, dump_system)

__version__ = "0.1.0"
