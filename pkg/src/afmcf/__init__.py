"""Almost-Fuchsian ambient geometry, closed-form estimates and graphical mean curvature flow."""

__version__ = "0.1.0"

from .errors import AdmissibilityError, BlowupError, FieldFormatError, SolverError
from .grid import PeriodicGrid, ScalarField, SymTensorField, integrate, read_field, write_field
from .surface import (ReferenceSurfaceData, SurfaceAreas, areas, check_gauss_residual,
                      load_surface, make_fuchsian, make_synthetic, save_surface,
                      solve_gauss_equation, synthetic_example)
from .foliation import AmbientFoliation, convexity_radius
from .estimates import (EstimateReport, burger_canary_bounds, hausdorff_bound, report,
                        volume_bound, volume_bound_taylor)
from .flow import (FlowConfig, FlowResult, FlowTrace, GraphSurfaceGeometry, graph_geometry,
                   rhs, run, step, verify_mean_curvature_evolution)

__all__ = [
    "AdmissibilityError", "BlowupError", "FieldFormatError", "SolverError",
    "PeriodicGrid", "ScalarField", "SymTensorField", "integrate", "read_field", "write_field",
    "ReferenceSurfaceData", "SurfaceAreas", "areas", "check_gauss_residual", "load_surface",
    "make_fuchsian", "make_synthetic", "save_surface", "solve_gauss_equation",
    "synthetic_example", "AmbientFoliation", "convexity_radius", "EstimateReport",
    "burger_canary_bounds", "hausdorff_bound", "report", "volume_bound", "volume_bound_taylor",
    "FlowConfig", "FlowResult", "FlowTrace", "GraphSurfaceGeometry", "graph_geometry", "rhs",
    "run", "step", "verify_mean_curvature_evolution",
]
