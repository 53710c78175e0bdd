"""Uniformization: the hyperbolic metric ``e^{2u} g0`` in the conformal class.

With ``L`` the cotangent stiffness matrix, ``kappa`` the angle defects and
``A`` the lumped areas of the background ``g0`` (see :mod:`.mesh`), the discrete Liouville equation
for Gauss curvature -1 reads

    F(u) = L u + kappa + A e^{2u} = 0.

``F`` is the gradient of the strictly convex potential
``1/2 u^T L u + kappa.u + 1/2 sum A e^{2u}``, so damped Newton converges
from any start.  Summing the rows gives ``sum A e^{2u} = -sum kappa =
-2 pi chi = 4 pi`` exactly at the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import (CHART_BRANCH, CHART_X, SurfaceMesh, background_density, branch_region,
                   chart_x, chart_xp)

LIOUVILLE_TOL = 1e-8
MAX_NEWTON = 50


class LiouvilleError(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(f"{msg}; residual history: {', '.join(f'{r:.3e}' for r in history)}")
        self.history = list(history)


@dataclass(frozen=True, eq=False)
class HyperbolicStructure:
    """Solved conformal factor ``u`` and hyperbolic vertex masses ``dA = A e^{2u}``."""

    mesh: SurfaceMesh
    u: np.ndarray
    dA: np.ndarray
    residual: float
    iterations: int
    history: tuple

    @property
    def total_area(self) -> float:
        return float(self.dA.sum())

    def density(self) -> np.ndarray:
        """Hyperbolic density ``rho`` (metric ``rho |dz|^2``) in each vertex's own chart."""
        return np.exp(2 * self.u) * self.mesh.background_density()


def liouville_residual(mesh: SurfaceMesh, u: np.ndarray) -> np.ndarray:
    """Pointwise residual ``F(u)/A`` (a curvature-scale quantity)."""
    return (mesh.L @ u + mesh.defect + mesh.area * np.exp(2 * u)) / mesh.area


def solve_liouville(mesh: SurfaceMesh, tol: float = LIOUVILLE_TOL,
                    max_iter: int = MAX_NEWTON) -> HyperbolicStructure:
    """Damped Newton for the discrete Liouville equation; deterministic in ``mesh``."""
    L, kap, A = mesh.L, mesh.defect, mesh.area

    def energy(u):
        return 0.5 * u @ (L @ u) + kap @ u + 0.5 * A @ np.exp(2 * u)

    u = np.full(len(A), 0.5 * np.log(-kap.sum() / A.sum()))
    history = []
    for it in range(1, max_iter + 1):
        F = L @ u + kap + A * np.exp(2 * u)
        res = float(np.max(np.abs(F / A)))
        history.append(res)
        if res < tol:
            break
        J = (L + sp.diags(2 * A * np.exp(2 * u))).tocsc()
        du = -spla.spsolve(J, F)
        e0, slope, t = energy(u), float(F @ du), 1.0
        # near the solution the energy decrease drops below rounding, so a
        # step that shrinks the residual is accepted without the energy test
        trial = u + du
        if np.max(np.abs((L @ trial + kap + A * np.exp(2 * trial)) / A)) >= res:
            while energy(u + t * du) > e0 + 1e-4 * t * slope and t > 1e-10:
                t *= 0.5
        u = u + t * du
    else:
        F = L @ u + kap + A * np.exp(2 * u)
        res = float(np.max(np.abs(F / A)))
        history.append(res)
        if res >= tol:
            raise LiouvilleError(f"Newton did not converge in {max_iter} steps", history)
    return HyperbolicStructure(mesh=mesh, u=u, dA=A * np.exp(2 * u), residual=res,
                               iterations=it, history=tuple(history))


def curvature_samples(structure: HyperbolicStructure, min_branch_dist: float = 0.15,
                      rings: int = 3, degree: int = 4) -> np.ndarray:
    """Gauss curvature re-evaluated from ``u`` by local polynomial fits.

    For ``rho = e^{2u} g1`` the curvature is ``K = e^{-2u} (K1 - g1^{-1} Lap u)``
    with ``K1 = -2|p|/(1+|x|^2)^3`` the curvature of ``g1`` and ``Lap`` the
    flat Laplacian of the chart.  ``Lap u`` comes from a least-squares
    polynomial fit of ``u`` over the ``rings``-ring of each regular vertex
    farther than ``min_branch_dist`` (chordal) from every root.  Inside a
    branch disk the fit uses the root coordinate ``w``, where ``u`` is smooth.
    """
    m = structure.mesh
    roots = m.points[:6]
    P = m.points[m.base_of]
    dmin = np.min(np.linalg.norm(P[:, None] - roots[None], axis=2), axis=1)
    region = branch_region(m.curve, chart_x(P))
    g1 = m.background_density()
    x = m.x()
    K1 = -2 * np.abs(m.curve.p(x)) / (1 + np.abs(x) ** 2) ** 3
    nbr = m.neighbours()
    out = []
    for k in np.nonzero((dmin > min_branch_dist) & (m.branch < 0))[0]:
        ring = {int(k)}
        front = {int(k)}
        for _ in range(rings):
            front = {int(j) for i in front for j in nbr[i]} - ring
            ring |= front
        idx = np.array(sorted(ring))
        e = int(region[k])
        if e >= 0:
            z = m.branch_coordinate(e, idx)
            z0 = z[idx == k][0]
            gk = background_density(m.curve, z0, CHART_BRANCH, e)
        else:
            idx = idx[m.branch[idx] < 0]
            z = chart_x(P[idx]) if m.chart[k] == CHART_X else chart_xp(P[idx])
            z0 = z[idx == k][0]
            gk = g1[k]
        d = z - z0
        scale = np.max(np.abs(d))
        X, Y = d.real / scale, d.imag / scale
        M = np.stack([X ** (t - q) * Y ** q for t in range(degree + 1) for q in range(t + 1)], axis=1)
        coef = np.linalg.lstsq(M, structure.u[idx], rcond=None)[0]
        # monomials ordered 1, X, Y, X^2, XY, Y^2, ...
        lap = 2 * (coef[3] + coef[5]) / scale ** 2
        out.append(np.exp(-2 * structure.u[k]) * (K1[k] - lap / gk))
    return np.array(out)
