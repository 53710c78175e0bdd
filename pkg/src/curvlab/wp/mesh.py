"""Triangulated genus-2 surfaces ``y^2 = p(x)`` as branched double covers.

The base is the Riemann sphere, embedded as the unit sphere with the
stereographic charts

    x  = (X + iY) / (1 - Z)      (used where Z <= 0)
    x' = (X - iY) / (1 + Z) = 1/x (used where Z > 0)

The six roots of ``p`` are mesh vertices.  Every other base vertex has two
lifts, labelled by a sheet sign ``s`` relative to the principal square root
in its preferred chart: ``y = s*sqrt(p(x))`` or ``y*x'^3 = s*sqrt(pt(x'))``
with ``pt(x') = x'^6 p(1/x')``.  Sheet relations along base edges come from
analytic continuation of ``y`` along the chart segment.

Background geometry (cotangent weights, lumped areas, angle defects) comes
from intrinsic triangles whose side lengths are measured in the conformal
metric ``g1 = (1 + |x|^2) |dx|^2 / |p(x)|``.  On the curve ``g1`` is smooth
and nonvanishing, including at the branch points (``4 (1+|x|^2)|dw|^2/|q|``
in the coordinate ``w``) and over infinity (``(1+|x'|^2)|dx'|^2/|pt|``), so
the conformal factor solved on top of it is smooth.  ``g1`` depends on
``|p|`` only, so both lifts of a base triangle share their geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import ConvexHull

ROOT_SEPARATION = 1e-6
BRANCH_CHART_RADIUS = 1e-8
MIN_ANGLE_DEG = 1.0
MAX_ANGLE_DEG = 178.0
MAX_LEVEL = 6
CONTINUATION_STEPS = 48

CHART_X, CHART_XP, CHART_BRANCH = 0, 1, 2


class MeshError(ValueError):
    """Invalid curve or a triangulation that violates its invariants."""


@dataclass(frozen=True)
class HyperellipticCurve:
    """The genus-2 curve ``y^2 = sum_k coeffs[k] x^k`` (degree exactly 6)."""

    coeffs: tuple
    roots: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.shape != (7,):
            raise MeshError(f"expected 7 coefficients c0..c6, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise MeshError("coefficients must be finite")
        if abs(c[6]) < 1e-12 * max(1.0, np.max(np.abs(c))):
            raise MeshError("leading coefficient c6 must be nonzero (degree 6)")
        roots = np.roots(c[::-1])
        for a in range(6):
            for b in range(a + 1, 6):
                d = abs(roots[a] - roots[b])
                if d <= ROOT_SEPARATION:
                    raise MeshError(
                        f"roots {a} and {b} are not separated: |{roots[a]:.6g} - {roots[b]:.6g}|"
                        f" = {d:.3e} <= {ROOT_SEPARATION:g}")
        object.__setattr__(self, "coeffs", tuple(complex(z) for z in c))
        object.__setattr__(self, "roots", roots)

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "HyperellipticCurve":
        return cls(tuple(np.poly(np.asarray(roots, dtype=complex))[::-1] * lead))

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def p(self, x):
        return np.polyval(self.c[::-1], x)

    def p_rev(self, xp):
        """``pt(x') = x'^6 p(1/x')``."""
        return np.polyval(self.c, xp)

    def dp(self, x):
        return np.polyval(np.polyder(self.c[::-1]), x)

    def q(self, k: int, x):
        """``p(x) / (x - e_k)`` evaluated as a polynomial (no cancellation)."""
        others = np.delete(self.roots, k)
        return self.c[6] * np.prod(np.subtract.outer(np.asarray(x), others), axis=-1)


# ---------------------------------------------------------------- sphere

def to_sphere(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    s = np.abs(x) ** 2
    return np.stack([2 * x.real / (s + 1), 2 * x.imag / (s + 1), (s - 1) / (s + 1)], axis=-1)


def chart_x(P):
    return (P[..., 0] + 1j * P[..., 1]) / (1 - P[..., 2])


def chart_xp(P):
    return (P[..., 0] - 1j * P[..., 1]) / (1 + P[..., 2])


def _icosphere(subdiv: int) -> np.ndarray:
    t = (1 + 5 ** 0.5) / 2
    V = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
                  [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], float)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    F = ConvexHull(V).simplices
    for _ in range(subdiv):
        V, F = _subdivide(V, F)
    return V


def _subdivide(V, F, curve=None):
    """Midpoint subdivision with new vertices on the unit sphere.

    Without a ``curve`` edges are split at the normalized chordal midpoint.
    With one they are split at half their background length along their
    paths (see :func:`_edge_paths`), so refinement stays uniform in the
    smooth metric, in particular near the branch points.
    """
    E = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    E, inv = np.unique(E, axis=0, return_inverse=True)
    inv = inv.ravel()
    if curve is None:
        mid = V[E[:, 0]] + V[E[:, 1]]
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    else:
        mid = _edge_midpoints(curve, V, E)
    nF = len(F)
    m01, m12, m20 = (len(V) + inv[k * nF:(k + 1) * nF] for k in range(3))
    a, b, c = F.T
    F2 = np.concatenate([np.stack([a, m01, m20], 1), np.stack([m01, b, m12], 1),
                         np.stack([m20, m12, c], 1), np.stack([m01, m12, m20], 1)])
    return np.vstack([V, mid]), F2


def _orient_outward(V, F):
    n = np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]])
    flip = np.einsum("ij,ij->i", n, V[F].sum(1)) < 0
    F = F.copy()
    F[flip] = F[flip][:, [0, 2, 1]]
    return F


def _edges(F):
    E = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    return np.unique(E, axis=0)


def base_triangulation(curve: HyperellipticCurve, level: int):
    """Sphere triangulation with the roots as vertices 0..5.

    Returns ``(V, F)``: unit-sphere points and outward-oriented triangles.
    """
    roots = to_sphere(curve.roots)
    fill = _icosphere(1)
    # a fixed generic rotation keeps fill points off symmetric root sets
    ang = np.array([0.3, 0.7, 1.1])
    cx, cy, cz = np.cos(ang)
    sx, sy, sz = np.sin(ang)
    Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    fill = fill @ (Rz @ Ry @ Rx).T
    d = np.linalg.norm(fill[:, None, :] - roots[None, :, :], axis=2)
    fill = fill[np.min(d, axis=1) > 0.3]
    V = np.vstack([roots, fill])
    F = _delaunay(V)
    for _ in range(4):
        E = _edges(F)
        if not np.any((E[:, 0] < 6) & (E[:, 1] < 6)) and not np.any(np.all(F < 6, axis=1)):
            break
        V, F = _refine(V, F, curve)
    else:
        raise MeshError("could not separate the branch points by refinement")
    for _ in range(level):
        V, F = _refine(V, F, curve)
    return V, F


def _delaunay(V):
    """Spherical Delaunay triangulation (the convex hull of points on the sphere)."""
    return _orient_outward(V, ConvexHull(V).simplices)


def _refine(V, F, curve):
    """Add the half-length midpoint of every edge and re-triangulate.

    The point set is that of one midpoint subdivision, so the face count
    grows by exactly four; the Delaunay connectivity avoids the slivers a
    fixed 1-to-4 split produces where the midpoints are unevenly spaced.
    """
    V2, _ = _subdivide(V, F, curve)
    return V2, _delaunay(V2)


# ---------------------------------------------------------------- sheets

def _preferred_chart(P):
    return np.where(P[..., 2] > 0, CHART_XP, CHART_X)


def _principal_y(curve, P, chart):
    """Principal-branch value of y (chart x) or y*x'^3 (chart x')."""
    return np.where(chart == CHART_X, np.sqrt(curve.p(chart_x(P)) + 0j),
                    np.sqrt(curve.p_rev(chart_xp(P)) + 0j))


def _arc(P0, P1, t):
    """Points at fractions ``t`` of the great-circle arcs from ``P0`` to ``P1``."""
    om = np.arccos(np.clip(np.einsum("ij,ij->i", P0, P1), -1.0, 1.0))
    s = np.sin(om)
    s = np.where(s > 1e-15, s, 1.0)
    a = np.where(om[:, None] > 1e-15, np.sin(np.outer(1 - t, om).T) / s[:, None], 1 - t)
    b = np.where(om[:, None] > 1e-15, np.sin(np.outer(t, om).T) / s[:, None], t)
    P = a[..., None] * P0[:, None, :] + b[..., None] * P1[:, None, :]
    return P / np.linalg.norm(P, axis=-1, keepdims=True), om


def _edge_parity(curve, V, E):
    """+1 when label s at E[:,0] continues to label s at E[:,1], else -1.

    ``y`` is continued along the great-circle arc of each edge, in chart
    ``x'`` when an endpoint lies in the upper hemisphere and in ``x`` otherwise.
    """
    P0, P1 = V[E[:, 0]], V[E[:, 1]]
    c0, c1 = _preferred_chart(P0), _preferred_chart(P1)
    use_xp = (c0 == CHART_XP) | (c1 == CHART_XP)
    t = np.linspace(0.0, 1.0, CONTINUATION_STEPS + 1)

    def in_chart(P, c):
        # value of the continued quantity in the edge chart from the principal label +1
        y = _principal_y(curve, P, c)
        yx = np.where(c == CHART_X, y, y / chart_xp(P) ** 3)     # y itself
        return np.where(use_xp, yx * chart_xp(P) ** 3, yx)

    path, _ = _arc(P0, P1, t)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(use_xp[:, None], np.sqrt(curve.p_rev(chart_xp(path)) + 0j),
                        np.sqrt(curve.p(chart_x(path)) + 0j))
    cur = in_chart(P0, c0)
    for k in range(1, len(t)):
        w = vals[:, k]
        cur = np.where(np.abs(w - cur) <= np.abs(w + cur), w, -w)
    end = in_chart(P1, c1)
    same = np.abs(cur - end) < np.abs(cur + end)
    return np.where(same, 1, -1)

# ---------------------------------------------------------------- geometry

_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(12)
_GAUSS_T, _GAUSS_W = 0.5 * (_GAUSS_T + 1), 0.5 * _GAUSS_W


def background_density(curve: HyperellipticCurve, z, chart: int, root: int = -1):
    """Density of ``g1 = (1+|x|^2)|dx|^2/|p(x)|`` in chart ``x``, ``x'`` or ``w`` (root ``root``)."""
    z = np.asarray(z, dtype=complex)
    if chart == CHART_X:
        return (1 + np.abs(z) ** 2) / np.abs(curve.p(z))
    if chart == CHART_XP:
        return (1 + np.abs(z) ** 2) / np.abs(curve.p_rev(z))
    x = curve.roots[root] + z * z
    return 4 * (1 + np.abs(x) ** 2) / np.abs(curve.q(root, x))


BRANCH_DISK_FRAC = 0.5


def branch_region(curve: HyperellipticCurve, x) -> np.ndarray:
    """Index of the root whose branch disk contains ``x``, else -1.

    The branch disk of root ``e`` is ``|x - e| < BRANCH_DISK_FRAC * d_e`` with
    ``d_e`` the distance to the nearest other root.
    """
    r = curve.roots
    d = np.abs(r[:, None] - r[None, :]) + np.diag(np.full(6, np.inf))
    rad = BRANCH_DISK_FRAC * d.min(axis=1)
    with np.errstate(invalid="ignore"):
        rel = np.abs(np.asarray(x)[..., None] - r) / rad
    rel = np.where(np.isfinite(rel), rel, np.inf)
    k = np.argmin(rel, axis=-1)
    return np.where(np.take_along_axis(rel, k[..., None], -1)[..., 0] < 1, k, -1)


def sphere_density(curve: HyperellipticCurve, P) -> np.ndarray:
    """Square root of the ratio of ``g1`` to the round metric of the unit sphere.

    With ``|dx|^2 = (1+|x|^2)^2 dsigma^2 / 4`` this is
    ``sqrt((1+|x|^2)^3 / (4 |p(x)|))``, evaluated in ``x'`` on the upper hemisphere.
    """
    P = np.asarray(P, float)
    up = P[..., 2] > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        lo = (2 / (1 - P[..., 2])) ** 3 / (4 * np.abs(curve.p(chart_x(P))))
        hi = (2 / (1 + P[..., 2])) ** 3 / (4 * np.abs(curve.p_rev(chart_xp(P))))
    return np.sqrt(np.where(up, hi, lo))


def _slerp(P0, P1, tm):
    """Point at fraction ``tm[k]`` of the arc from ``P0[k]`` to ``P1[k]``."""
    om = np.arccos(np.clip(np.einsum("ij,ij->i", P0, P1), -1.0, 1.0))
    s = np.where(om > 1e-15, np.sin(om), 1.0)
    a = np.where(om > 1e-15, np.sin((1 - tm) * om) / s, 1 - tm)
    b = np.where(om > 1e-15, np.sin(tm * om) / s, tm)
    P = a[:, None] * P0 + b[:, None] * P1
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def _edge_paths(curve, V, E):
    """Root coordinates of the base edges that end at a root (roots are vertices 0..5).

    Such an edge is a straight segment from ``w = 0`` in the coordinate
    ``w = sqrt(x - e)``, where the background metric is smooth; it is a
    straight ray in ``x``.  Returns ``(root, w1)`` with ``root = -1`` for
    the other edges, which follow great-circle arcs.
    """
    root = np.where(E[:, 0] < 6, E[:, 0], -1)
    x1 = chart_x(V[E[:, 1]])
    with np.errstate(invalid="ignore"):
        w1 = np.where(root >= 0, np.sqrt(x1 - curve.roots[np.maximum(root, 0)] + 0j), 0)
    return root, w1


def _edge_charts(curve, V, E):
    """Chart in which each base edge's length is measured (roots are vertices 0..5).

    Returns ``(chart, root, z0, z1)``.  An edge at a root, or with both ends
    in one branch disk, is measured in that root's coordinate
    ``w = sqrt(x - e)`` (the second end on the branch nearest the first),
    where the background metric is smooth.  Other edges are measured in
    ``x'`` when an endpoint lies in the upper hemisphere and in ``x``
    otherwise.
    """
    P0, P1 = V[E[:, 0]], V[E[:, 1]]
    with np.errstate(invalid="ignore", divide="ignore"):
        x0, x1 = chart_x(P0), chart_x(P1)
        r0, r1 = branch_region(curve, x0), branch_region(curve, x1)
        root = np.where(E[:, 0] < 6, E[:, 0], np.where(r0 == r1, r0, -1))
        chart = np.where(root >= 0, CHART_BRANCH,
                         np.where((P0[:, 2] > 0) | (P1[:, 2] > 0), CHART_XP, CHART_X))
        z0 = np.where(chart == CHART_X, x0, chart_xp(P0))
        z1 = np.where(chart == CHART_X, x1, chart_xp(P1))
        e = curve.roots[np.maximum(root, 0)]
        w0 = np.where(E[:, 0] < 6, 0, np.sqrt(x0 - e + 0j))
        w1 = np.sqrt(x1 - e + 0j)
    w1 = np.where(np.abs(w1 - w0) <= np.abs(w1 + w0), w1, -w1)
    z0 = np.where(root >= 0, w0, z0)
    z1 = np.where(root >= 0, w1, z1)
    return chart, root, z0, z1


GEODESIC_NEWTON_STEPS = 3


def _bent_length(curve, z0, z1, c, chart, root):
    """Length of ``z(t) = z0 + t d + t(1-t) c`` with ``d = z1 - z0``, by Gauss quadrature."""
    t = _GAUSS_T[None, :]
    d = (z1 - z0)[:, None]
    z = z0[:, None] + t * d + (t * (1 - t)) * c[:, None]
    dz = d + (1 - 2 * t) * c[:, None]
    dens = background_density(curve, z, chart, root)
    return (np.sqrt(dens) * np.abs(dz)) @ _GAUSS_W


def _geodesic_lengths(curve, z0, z1, chart, root=-1):
    """Approximate geodesic distances between chart points.

    The straight chord is bent into the quadratic curve of least length,
    ``c = i s d`` with real ``s`` found by a few safeguarded Newton steps;
    this removes the leading error of measuring along a non-geodesic path.
    A bend along ``d`` only reparametrizes the chord, so it is left out.
    """
    d = z1 - z0
    s = np.zeros(len(z0))
    h = 1e-3
    for _ in range(GEODESIC_NEWTON_STEPS):
        fm, f0, fp = (_bent_length(curve, z0, z1, 1j * (s + k * h) * d, chart, root)
                      for k in (-1, 0, 1))
        g = (fp - fm) / (2 * h)
        H = (fp - 2 * f0 + fm) / h ** 2
        step = np.where(H > 0, -g / np.where(H > 0, H, 1), 0.0)
        # the bend stays a small perturbation of the chord, and only steps
        # that shorten the curve are taken
        step = np.clip(step, -0.25, 0.25)
        trial = _bent_length(curve, z0, z1, 1j * (s + step) * d, chart, root)
        s = np.where(trial < f0, s + step, s)
    return _bent_length(curve, z0, z1, 1j * s * d, chart, root)


def _edge_lengths(curve, V, E):
    """Background (approximately geodesic) lengths of base edges."""
    chart, root, z0, z1 = _edge_charts(curve, V, E)
    out = np.empty(len(E))
    groups = [(chart == CHART_X, CHART_X, -1), (chart == CHART_XP, CHART_XP, -1)]
    groups += [(root == e, CHART_BRANCH, e) for e in range(6)]
    for sel, ch, e in groups:
        if np.any(sel):
            out[sel] = _geodesic_lengths(curve, z0[sel], z1[sel], ch, e)
    return out


def _half_length_fraction(dens, t):
    """Parameter at which the trapezoid-integrated ``dens`` reaches half its total."""
    cum = np.concatenate([np.zeros((len(dens), 1)),
                          np.cumsum(0.5 * (dens[:, 1:] + dens[:, :-1]), axis=1)], axis=1)
    half = 0.5 * cum[:, -1:]
    samples = len(t) - 1
    k = np.clip(np.sum(cum < half, axis=1) - 1, 0, samples - 1)
    idx = np.arange(len(dens))
    lo, hi = cum[idx, k], cum[idx, k + 1]
    return t[k] + (half[:, 0] - lo) / (hi - lo) * (t[1] - t[0])


def _edge_midpoints(curve, V, E, samples: int = 64):
    """Points at half background length along each edge's path."""
    root, w1 = _edge_paths(curve, V, E)
    out = np.empty((len(E), 3))
    t = np.linspace(0.0, 1.0, samples + 1)
    arc = root < 0
    if np.any(arc):
        P0, P1 = V[E[arc, 0]], V[E[arc, 1]]
        pts, _ = _arc(P0, P1, t)
        tm = _half_length_fraction(sphere_density(curve, pts), t)
        out[arc] = _slerp(P0, P1, tm)
    for e in range(6):
        sel = root == e
        if not np.any(sel):
            continue
        b = w1[sel]
        dens = np.sqrt(background_density(curve, b[:, None] * t, CHART_BRANCH, e))
        tm = _half_length_fraction(dens, t)
        out[sel] = to_sphere(curve.roots[e] + (b * tm) ** 2)
    return out


def _angles_from_lengths(ell):
    """Interior angles opposite each side for rows of side lengths."""
    a, b, c = ell.T
    def ang(x, y, z):
        return np.arccos(np.clip((y * y + z * z - x * x) / (2 * y * z), -1, 1))
    return np.stack([ang(a, b, c), ang(b, c, a), ang(c, a, b)], axis=1)


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangulated double cover with background (chordal) geometry.

    Cover vertex ``k`` sits over base vertex ``base_of[k]`` with sheet label
    ``sheet[k]`` (0 for branch points).  ``L`` is the positive semidefinite
    cotangent stiffness matrix, ``area`` the lumped (barycentric) vertex
    areas and ``defect`` the angle defects ``2*pi - sum of angles``.
    """

    curve: HyperellipticCurve
    level: int
    points: np.ndarray          # base vertices on the unit sphere
    base_faces: np.ndarray
    base_of: np.ndarray
    sheet: np.ndarray
    branch: np.ndarray          # root index, -1 for regular cover vertices
    faces: np.ndarray
    L: sp.csr_matrix
    area: np.ndarray
    defect: np.ndarray
    chart: np.ndarray           # CHART_X / CHART_XP / CHART_BRANCH per vertex
    min_angle: float
    max_angle: float

    @property
    def n_vertices(self) -> int:
        return len(self.base_of)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(_edges(self.faces)) + len(self.faces)

    @property
    def is_branch(self) -> np.ndarray:
        return self.branch >= 0

    # -- chart coordinates -------------------------------------------------
    def x(self, k=None):
        k = slice(None) if k is None else k
        return chart_x(self.points[self.base_of[k]])

    def xp(self, k=None):
        k = slice(None) if k is None else k
        return chart_xp(self.points[self.base_of[k]])

    def chart_coordinate(self):
        """Coordinate of every vertex in its own chart (0 at branch points)."""
        return np.where(self.chart == CHART_X, self.x(), np.where(self.chart == CHART_XP, self.xp(), 0))

    def background_density(self) -> np.ndarray:
        """Density of the background metric at each vertex in its own chart."""
        z = self.chart_coordinate()
        out = np.empty(len(z))
        for c in (CHART_X, CHART_XP):
            sel = self.chart == c
            out[sel] = background_density(self.curve, z[sel], c)
        for k in np.nonzero(self.chart == CHART_BRANCH)[0]:
            out[k] = background_density(self.curve, 0.0, CHART_BRANCH, int(self.branch[k]))
        return out

    def y(self, k):
        """Value of y at regular cover vertices ``k`` (x-chart normalization)."""
        k = np.asarray(k)
        P = self.points[self.base_of[k]]
        c = _preferred_chart(P)
        y = _principal_y(self.curve, P, c) * self.sheet[k]
        return np.where(c == CHART_X, y, y / chart_xp(P) ** 3)

    def branch_coordinate(self, root: int, k):
        """Local coordinate ``w`` (``w^2 = x - e``) of cover vertices ``k`` near root ``root``.

        Fixed by ``y = w * sqrt(q(x))`` where ``sqrt(q)`` is the product of the
        principal roots of ``(x - e_k)/(e - e_k)`` times ``sqrt(q(e))``; this
        is continuous on the disk ``|x - e| < min_k |e - e_k|``.  The root
        itself maps to 0.
        """
        k = np.asarray(k)
        out = np.zeros(k.shape, dtype=complex)
        reg = self.branch[k] < 0
        if np.any(reg):
            kk = k[reg]
            x = self.x(kk)
            e = self.curve.roots[root]
            others = np.delete(self.curve.roots, root)
            ratio = np.subtract.outer(x, others) / (e - others)
            sq = np.sqrt(self.curve.q(root, e) + 0j) * np.prod(np.sqrt(ratio + 0j), axis=-1)
            out[reg] = self.y(kk) / sq
        return out

    def branch_disk_radius(self, root: int) -> float:
        """Radius in ``x`` on which :meth:`branch_coordinate` is continuous."""
        e = self.curve.roots[root]
        return float(np.min(np.abs(np.delete(self.curve.roots, root) - e)))

    def neighbours(self) -> list:
        return np.split(self.L.indices, self.L.indptr[1:-1])


def build_mesh(curve: HyperellipticCurve, level: int) -> SurfaceMesh:
    """Triangulate the double cover of the sphere branched at the roots of ``p``."""
    if not (isinstance(level, (int, np.integer)) and 0 <= level <= MAX_LEVEL):
        raise MeshError(f"refinement level must be an integer in 0..{MAX_LEVEL}, got {level!r}")
    V, F = base_triangulation(curve, int(level))
    nb = len(V)
    is_root = np.arange(nb) < 6

    # cover vertices: roots once, regular base vertices twice
    base_of = np.concatenate([np.arange(6), np.repeat(np.arange(6, nb), 2)])
    sheet = np.concatenate([np.zeros(6, int), np.tile([1, -1], nb - 6)])
    branch = np.concatenate([np.arange(6), -np.ones(2 * (nb - 6), int)])

    def cover_id(b, s):
        return np.where(b < 6, b, 6 + 2 * (b - 6) + (s < 0))

    E = _edges(F)
    reg = ~is_root[E[:, 0]] & ~is_root[E[:, 1]]
    parity = {}
    par = _edge_parity(curve, V, E[reg])
    for (a, b), s in zip(E[reg], par):
        parity[(int(a), int(b))] = int(s)

    def rel(a, b):
        if is_root[a] or is_root[b]:
            return 1
        return parity[(a, b) if a < b else (b, a)]

    faces = []
    for a, b, c in F:
        a, b, c = int(a), int(b), int(c)
        if not (is_root[a] or is_root[b] or is_root[c]):
            if rel(a, b) * rel(b, c) * rel(c, a) != 1:
                raise MeshError(f"inconsistent sheet monodromy around base triangle {(a, b, c)}")
        # start the lift on a regular vertex
        order = (a, b, c) if not is_root[a] else ((b, c, a) if not is_root[b] else (c, a, b))
        u, v, w = order
        for s in (1, -1):
            sv = s * rel(u, v)
            sw = sv * rel(v, w) if not is_root[v] else s * rel(u, w)
            tri = [cover_id(u, s), cover_id(v, sv), cover_id(w, sw)]
            # restore the original orientation
            shift = (a, b, c).index(u)
            faces.append(tri[-shift:] + tri[:-shift] if shift else tri)
    faces = np.array(faces, dtype=int)

    # background geometry: intrinsic triangles of the smooth metric g1
    E, inv = np.unique(np.sort(np.concatenate([F[:, [1, 2]], F[:, [2, 0]], F[:, [0, 1]]]), axis=1),
                       axis=0, return_inverse=True)
    ell = _edge_lengths(curve, V, E)[inv.ravel()].reshape(3, -1).T    # opposite vertex k
    ang = _angles_from_lengths(ell)
    base_ang = np.degrees(ang)
    amin, amax = float(base_ang.min()), float(base_ang.max())
    if amin <= MIN_ANGLE_DEG or amax >= MAX_ANGLE_DEG:
        raise MeshError(f"triangle angles outside ({MIN_ANGLE_DEG}, {MAX_ANGLE_DEG}) degrees:"
                        f" min {amin:.3f}, max {amax:.3f}")
    ang = np.repeat(ang, 2, axis=0)
    ell = np.repeat(ell, 2, axis=0)
    tri_area = 0.5 * ell[:, 1] * ell[:, 2] * np.sin(ang[:, 0])
    cot = 1.0 / np.tan(ang)
    nv = len(base_of)
    I, J, W = [], [], []
    for k, (p, q) in enumerate(((1, 2), (2, 0), (0, 1))):
        w = 0.5 * cot[:, k]
        I += [faces[:, p], faces[:, q]]
        J += [faces[:, q], faces[:, p]]
        W += [w, w]
    I, J, W = np.concatenate(I), np.concatenate(J), np.concatenate(W)
    off = sp.coo_matrix((-W, (I, J)), shape=(nv, nv)).tocsr()
    L = (off - sp.diags(np.asarray(off.sum(axis=1)).ravel())).tocsr()
    L.sum_duplicates()
    area = np.bincount(faces.ravel(), weights=np.repeat(tri_area / 3, 3), minlength=nv)
    angsum = np.bincount(faces.ravel(), weights=ang.ravel(), minlength=nv)
    defect = 2 * np.pi - angsum

    P = V[base_of]
    chart = np.where(branch >= 0, CHART_BRANCH, _preferred_chart(P))
    mesh = SurfaceMesh(curve=curve, level=int(level), points=V, base_faces=F, base_of=base_of,
                       sheet=sheet, branch=branch, faces=faces, L=L, area=area, defect=defect,
                       chart=chart, min_angle=amin, max_angle=amax)
    _check_topology(mesh)
    return mesh


def _check_topology(mesh: SurfaceMesh) -> None:
    F = mesh.faces
    if len(np.unique(np.sort(F, axis=1), axis=0)) != len(F):
        raise MeshError("duplicate faces in the lifted triangulation")
    half = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    if len(np.unique(half, axis=0)) != len(half):
        raise MeshError("lifted triangulation is not consistently oriented")
    und = np.sort(half, axis=1)
    _, counts = np.unique(und, axis=0, return_counts=True)
    if np.any(counts != 2):
        raise MeshError("lifted triangulation is not a closed manifold")
    chi = mesh.euler_characteristic
    if chi != -2:
        raise MeshError(f"Euler characteristic {chi}, expected -2")
