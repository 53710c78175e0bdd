"""Weil-Petersson curvature of a genus-2 hyperelliptic surface."""

from .curvature import (StructureMismatch, WPCurvature, duality_residual, normalized,
                        symmetrized_identity_check, tangent_curvature, wolpert_curvature)
from .differentials import DifferentialBasis, harmonicity_residual, quadratic_differential_basis
from .green import GreenError, GreenOperator, green_apply, green_kernel
from .liouville import HyperbolicStructure, LiouvilleError, curvature_samples, solve_liouville
from .mesh import HyperellipticCurve, MeshError, SurfaceMesh, build_mesh
from .pipeline import WPRun, run_wp

__all__ = [
    "StructureMismatch", "WPCurvature", "duality_residual", "normalized",
    "symmetrized_identity_check", "tangent_curvature", "wolpert_curvature",
    "DifferentialBasis", "harmonicity_residual", "quadratic_differential_basis",
    "GreenError", "GreenOperator", "green_apply", "green_kernel",
    "HyperbolicStructure", "LiouvilleError", "curvature_samples", "solve_liouville",
    "HyperellipticCurve", "MeshError", "SurfaceMesh", "build_mesh", "WPRun", "run_wp",
]
