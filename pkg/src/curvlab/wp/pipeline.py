"""End-to-end Weil-Petersson run: mesh, uniformization, tensors, verdicts, manifest."""

from __future__ import annotations

import hashlib
import json
import platform
import time
from dataclasses import dataclass, field

import numpy as np
import scipy

from .. import __version__
from ..positivity.classify import ClassificationReport, classify_all
from ..tensor_core import CurvatureTensor
from .curvature import (WPCurvature, duality_residual, normalized, symmetrized_identity_check,
                        wolpert_curvature)
from .differentials import DifferentialBasis, harmonicity_residual, quadratic_differential_basis
from .green import GreenOperator
from .liouville import HyperbolicStructure, curvature_samples, solve_liouville
from .mesh import HyperellipticCurve, SurfaceMesh, build_mesh

MESH_TOL_FACTOR = 1e-3
DENSE_KERNEL_LIMIT = 9000      # vertices; the dense kernel needs 8 V^2 bytes
EXPECTED = {
    ("cotangent", "nakano"): ("positive",),
    ("cotangent", "dual_nakano"): ("nonnegative", "positive"),
    ("tangent", "dual_nakano"): ("negative",),
    ("tangent", "nakano"): ("nonpositive", "negative"),
}

X6_MINUS_1 = (-1, 0, 0, 0, 0, 0, 1)


def versions() -> dict:
    return {"curvlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _complex_list(a):
    a = np.asarray(a)
    return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}


@dataclass
class WPRun:
    mesh: SurfaceMesh
    structure: HyperbolicStructure
    basis: DifferentialBasis
    curvature: WPCurvature
    cotangent: CurvatureTensor          # orthonormal coframe
    tangent: CurvatureTensor            # orthonormal frame
    mesh_tol: float
    cotangent_report: ClassificationReport
    tangent_report: ClassificationReport
    manifest: dict = field(default_factory=dict)

    @property
    def verdicts(self) -> dict:
        return {("cotangent", k): v.sign for k, v in self.cotangent_report.verdicts.items()} | \
               {("tangent", k): v.sign for k, v in self.tangent_report.verdicts.items()}

    @property
    def mismatches(self) -> list:
        got = self.verdicts
        return [f"{side} {notion}: {got.get((side, notion))} (expected {' or '.join(ok)})"
                for (side, notion), ok in EXPECTED.items() if got.get((side, notion)) not in ok]

    @property
    def as_expected(self) -> bool:
        return not self.mismatches


def run_wp(curve: HyperellipticCurve | None = None, level: int = 3, seed: int = 0,
           samples: int = 10_000, restarts: int = 20, identity_trials: int = 20,
           dense_kernel: bool | None = None, curvature_check: bool = True,
           tol: float | None = None) -> WPRun:
    """Run the whole pipeline at one refinement level and assemble the manifest.

    Semidefinite verdicts use ``tol`` when given, otherwise ``MESH_TOL_FACTOR``
    times the max-norm of each normalized tensor.
    """
    curve = HyperellipticCurve(X6_MINUS_1) if curve is None else curve
    t0 = time.perf_counter()
    timings = {}

    def lap(name):
        nonlocal t0
        t = time.perf_counter()
        timings[name] = round(t - t0, 4)
        t0 = t

    mesh = build_mesh(curve, level)
    lap("mesh")
    structure = solve_liouville(mesh)
    lap("liouville")
    basis = quadratic_differential_basis(structure)
    green = GreenOperator(structure)
    curv = wolpert_curvature(basis, green=green)
    cot, tan = normalized(curv, basis)
    lap("tensors")
    mesh_tol = MESH_TOL_FACTOR * cot.max_norm if tol is None else float(tol)
    tan_tol = MESH_TOL_FACTOR * tan.max_norm if tol is None else float(tol)
    ss = np.random.SeedSequence(seed)
    s_cot, s_tan, s_green, s_id = ss.spawn(4)
    cot_report = classify_all(cot, samples, restarts, mesh_tol, s_cot)
    tan_report = classify_all(tan, samples, restarts, tan_tol, s_tan)
    lap("classify")

    rng = np.random.default_rng(s_green)
    f = rng.normal(size=(mesh.n_vertices, 4))
    u = green.apply(f)
    green_identity = float(np.max(np.abs(green.operator(u) - f)) / np.max(np.abs(f)))
    const = float(np.max(np.abs(green.apply(np.ones(mesh.n_vertices)) - 1)))

    if dense_kernel is None:
        dense_kernel = mesh.n_vertices <= DENSE_KERNEL_LIMIT
    kernel_info = None
    identity = None
    if dense_kernel:
        G, asym = green.kernel()
        inv_res = float(np.max(np.abs(green.K @ G[:, :64] - np.eye(mesh.n_vertices)[:, :64])))
        kernel_info = {"asymmetry": asym, "symmetry_residual": float(np.max(np.abs(G - G.T))),
                       "min_entry": float(G.min()), "max_entry": float(G.max()),
                       "inverse_residual_first64": inv_res}
        rng = np.random.default_rng(s_id)
        rows = []
        for _ in range(identity_trials):
            U = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            lhs, rhs, res = symmetrized_identity_check(basis, structure, U, kernel=G, curvature=curv)
            rows.append({"lhs": lhs, "rhs": rhs, "residual": res})
        identity = {"trials": rows, "max_residual": max(r["residual"] for r in rows),
                    "min_rhs": min(r["rhs"] for r in rows)}
        del G
        lap("kernel")

    ksamp = None
    if curvature_check:
        K = curvature_samples(structure)
        ksamp = {"count": int(len(K)), "median": float(np.median(K)),
                 "p05": float(np.percentile(K, 5)), "p95": float(np.percentile(K, 95)),
                 "min": float(K.min()), "max": float(K.max()),
                 "fraction_within_2pct": float(np.mean(np.abs(K + 1) <= 0.02))}
        lap("curvature_check")

    config = {"curve": _complex_list(curve.coeffs), "level": int(level), "seed": int(seed),
              "samples": int(samples), "restarts": int(restarts),
              "identity_trials": int(identity_trials), "mesh_tol_factor": MESH_TOL_FACTOR,
              "tol": None if tol is None else float(tol)}
    run = WPRun(mesh=mesh, structure=structure, basis=basis, curvature=curv, cotangent=cot,
                tangent=tan, mesh_tol=mesh_tol, cotangent_report=cot_report,
                tangent_report=tan_report)
    bis = tan_report.verdicts.get("bisectional")
    run.manifest = {
        "config": config, "config_hash": config_hash(config), "versions": versions(),
        "mesh": {"vertices": mesh.n_vertices, "faces": int(len(mesh.faces)),
                 "euler_characteristic": mesh.euler_characteristic,
                 "min_angle_deg": mesh.min_angle, "max_angle_deg": mesh.max_angle,
                 "laplacian_symmetry": float(abs(mesh.L - mesh.L.T).max()),
                 "laplacian_row_sum": float(np.max(np.abs(mesh.L.sum(axis=1))))},
        "liouville": {"area": structure.total_area,
                      "area_relative_error": structure.total_area / (4 * np.pi) - 1,
                      "residual": structure.residual, "iterations": structure.iterations,
                      "history": list(structure.history)},
        "curvature_check": ksamp,
        "green": {"identity_residual": green_identity, "constant_residual": const,
                  "kernel": kernel_info},
        "basis": {"size": basis.size, "gram_wp": _complex_list(basis.gram_wp),
                  "gram_hodge": _complex_list(basis.gram_hodge),
                  "gram_wp_eigenvalues": np.linalg.eigvalsh(basis.gram_wp).tolist(),
                  "hodge_wp_residual": basis.hodge_wp_residual(),
                  "pointwise_norm_residual": basis.pointwise_norm_residual(),
                  "harmonicity_residual": harmonicity_residual(basis).tolist()},
        "tensors": curv.to_dict() | {
            "duality_residual": duality_residual(curv, basis),
            "cotangent_max_norm": cot.max_norm, "tangent_max_norm": tan.max_norm,
            "mesh_tol": mesh_tol, "tangent_tol": tan_tol,
            "cotangent_diagonal_min": float(np.min(np.einsum("iiii->i", curv.cotangent.entries).real)),
            "tangent_bisectional_sampled_max": None if bis is None else bis.max_value},
        "symmetrization": identity,
        "reports": {"cotangent": cot_report.to_dict(), "tangent": tan_report.to_dict()},
        "verdicts_as_expected": run.as_expected, "mismatches": run.mismatches,
        "timings_s": timings,
    }
    return run
