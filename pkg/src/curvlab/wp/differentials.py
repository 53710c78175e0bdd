"""Holomorphic quadratic differentials and harmonic Beltrami differentials.

A basis of H^0(K^2) on ``y^2 = p(x)`` is ``sigma_a = x^(a-1) dx^2 / y^2``,
``a = 1, 2, 3``.  Since ``y^2 = p`` the coefficient is sheet independent:

    chart x   : f_a = x^(a-1) / p(x)
    chart x'  : f_a = x'^(3-a) / pt(x')        (x = 1/x', pt = x'^6 p(1/x'))
    chart w   : f_a = 4 x^(a-1) / q(x)         (x = e + w^2, p = (x - e) q)

each holomorphic and, for ``x'`` and ``w``, finite at infinity and at the
branch points.  With the hyperbolic metric ``rho |dz|^2`` and Kähler
coefficient ``g = rho / 2`` the harmonic Beltrami differential is
``theta_a = conj(f_a) / g``; the pointwise products ``theta_a conj(theta_b)``
are functions, so the vertex-lumped quadrature needs no chart bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liouville import HyperbolicStructure
from .mesh import (CHART_BRANCH, CHART_X, CHART_XP, SurfaceMesh, branch_region, chart_x,
                   chart_xp)

BASIS_SIZE = 3   # 3g - 3 for genus 2


def coefficients(mesh: SurfaceMesh, z: np.ndarray, chart: int, root: int = -1) -> np.ndarray:
    """Coefficients ``f_a`` (last axis) at chart points ``z``."""
    z = np.asarray(z, dtype=complex)
    c = mesh.curve
    a = np.arange(BASIS_SIZE)
    if chart == CHART_X:
        return z[..., None] ** a / c.p(z)[..., None]
    if chart == CHART_XP:
        return z[..., None] ** (2 - a) / c.p_rev(z)[..., None]
    if chart == CHART_BRANCH:
        x = c.roots[root] + z * z
        return 4 * x[..., None] ** a / c.q(root, x)[..., None]
    raise ValueError(f"unknown chart {chart!r}")


def vertex_coefficients(mesh: SurfaceMesh) -> np.ndarray:
    """``f_a`` at every vertex in that vertex's own chart, shape ``(V, 3)``."""
    z = mesh.chart_coordinate()
    out = np.empty((mesh.n_vertices, BASIS_SIZE), dtype=complex)
    for ch in (CHART_X, CHART_XP):
        sel = mesh.chart == ch
        out[sel] = coefficients(mesh, z[sel], ch)
    for k in np.nonzero(mesh.chart == CHART_BRANCH)[0]:
        out[k] = coefficients(mesh, 0.0, CHART_BRANCH, int(mesh.branch[k]))
    return out


@dataclass(frozen=True, eq=False)
class DifferentialBasis:
    """Sampled quadratic differentials, their Beltrami images and Gram matrices."""

    structure: HyperbolicStructure
    f: np.ndarray          # (V, 3) chart coefficients of sigma_a
    rho: np.ndarray        # (V,) hyperbolic density in the same charts
    theta: np.ndarray      # (V, 3) Beltrami coefficients conj(f) / g, g = rho/2
    gram_wp: np.ndarray    # <theta_i, theta_j> = sum dA theta_i conj(theta_j)
    gram_hodge: np.ndarray  # sum dA g^-2 f_a conj(f_b)

    @property
    def size(self) -> int:
        return self.f.shape[1]

    def pairing(self) -> np.ndarray:
        """``P[v, a, b] = theta_a(v) conj(theta_b(v))`` (chart invariant)."""
        return self.theta[:, :, None] * np.conj(self.theta[:, None, :])

    def hodge_wp_residual(self) -> float:
        """``max|G_H - conj(G_WP)| / max|G_H|`` (the conjugate isometry)."""
        return float(np.max(np.abs(self.gram_hodge - np.conj(self.gram_wp)))
                     / np.max(np.abs(self.gram_hodge)))

    def pointwise_norm_residual(self) -> float:
        """``max | |theta_a| - |f_a| / g |`` relative to ``max |theta|``."""
        g = 0.5 * self.rho
        d = np.abs(np.abs(self.theta) - np.abs(self.f) / g[:, None])
        return float(np.max(d) / np.max(np.abs(self.theta)))


def quadratic_differential_basis(structure: HyperbolicStructure,
                                 transform: np.ndarray | None = None) -> DifferentialBasis:
    """Sample ``sigma_a`` and ``theta_a = T(sigma_a)`` on the solved structure.

    ``transform`` (3x3, invertible) replaces the basis by
    ``sigma'_b = sum_a transform[a, b] sigma_a``.
    """
    mesh = structure.mesh
    f = vertex_coefficients(mesh)
    if transform is not None:
        f = f @ np.asarray(transform, dtype=complex)
    if not np.all(np.isfinite(f)):
        raise ValueError("quadratic differential coefficients are not finite on the mesh")
    rho = structure.density()
    g = 0.5 * rho
    theta = np.conj(f) / g[:, None]
    dA = structure.dA
    gram_wp = (dA[:, None] * theta).T @ np.conj(theta)
    gram_hodge = (dA[:, None] * f / g[:, None] ** 2).T @ np.conj(f)
    return DifferentialBasis(structure=structure, f=f, rho=rho, theta=theta,
                             gram_wp=gram_wp, gram_hodge=gram_hodge)


def harmonicity_residual(basis: DifferentialBasis) -> np.ndarray:
    """Relative size of ``d/dz`` of ``g theta_a = conj(f_a)`` per basis element.

    ``g theta`` is antiholomorphic exactly when ``theta`` is harmonic, so the
    residual ``||d_z F|| / ||d_zbar F||`` of the piecewise-linear interpolant
    ``F`` of ``conj(f_a)`` measures the defect.  Each triangle is evaluated in
    one chart: the root coordinate ``w`` for triangles inside a branch disk,
    otherwise ``x'`` if a vertex lies in the upper hemisphere and ``x``.
    """
    mesh = basis.structure.mesh
    Fc = mesh.faces
    P = mesh.points[mesh.base_of]
    num = np.zeros(basis.size)
    den = np.zeros(basis.size)
    region = branch_region(mesh.curve, chart_x(P))
    region = np.where(mesh.branch >= 0, mesh.branch, region)[Fc]
    disk = np.where(np.all(region == region[:, :1], axis=1), region[:, 0], -1)
    up = np.any(P[Fc][..., 2] > 0, axis=1)
    groups = [((disk < 0) & ~up, CHART_X, -1), ((disk < 0) & up, CHART_XP, -1)]
    groups += [(disk == e, CHART_BRANCH, e) for e in range(6)]
    for sel, ch, e in groups:
        tri = Fc[sel]
        if len(tri) == 0:
            continue
        if ch == CHART_X:
            z = chart_x(P[tri])
        elif ch == CHART_XP:
            z = chart_xp(P[tri])
        else:
            z = mesh.branch_coordinate(e, tri.ravel()).reshape(tri.shape)
        F = np.conj(coefficients(mesh, z, ch, e))
        d1, d2 = z[:, 1] - z[:, 0], z[:, 2] - z[:, 0]
        F1, F2 = F[:, 1] - F[:, 0], F[:, 2] - F[:, 0]
        # solve F_k = a d_k + b conj(d_k): a = dF/dz, b = dF/dzbar
        det = d1 * np.conj(d2) - np.conj(d1) * d2
        a = (F1 * np.conj(d2)[:, None] - F2 * np.conj(d1)[:, None]) / det[:, None]
        b = (d1[:, None] * F2 - d2[:, None] * F1) / det[:, None]
        area = 0.25 * np.abs(det.imag)
        num += area @ np.abs(a) ** 2
        den += area @ np.abs(b) ** 2
    return np.sqrt(num / den)
