"""The resolvent ``(Delta0 + 1)^{-1}`` of the hyperbolic Laplacian on functions.

``Delta0`` is the nonnegative Laplacian ``dbar^* dbar``, which for the
Kähler form of the hyperbolic metric is half the Laplace-Beltrami operator.
The Dirichlet energy is conformally invariant, so in the weak form

    (1/2 L + M) u = M f,      M = diag(dA)

the background cotangent matrix ``L`` can be used directly with the
hyperbolic vertex masses ``dA``.  The discrete kernel is ``G = K^{-1}`` with
``K = L/2 + M``: then ``u(z) = sum_w G(z, w) f(w) dA(w)`` and
``(Delta0 + 1) G = M^{-1}``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .liouville import HyperbolicStructure


class GreenError(RuntimeError):
    pass


class GreenOperator:
    """Factorized ``K = L/2 + M`` for repeated solves on one structure."""

    def __init__(self, structure: HyperbolicStructure):
        self.structure = structure
        self.mass = structure.dA
        self.K = (0.5 * structure.mesh.L + sp.diags(self.mass)).tocsc()
        try:
            self._solve = spla.factorized(self.K)
        except RuntimeError as exc:
            raise GreenError(f"factorization failed: {exc}") from exc

    def apply(self, f: np.ndarray) -> np.ndarray:
        """``(Delta0 + 1)^{-1} f`` for one or several (columns) vertex functions."""
        f = np.asarray(f)
        rhs = self.mass[:, None] * f.reshape(len(self.mass), -1)
        out = np.empty(rhs.shape, dtype=np.result_type(rhs, float))
        for k in range(rhs.shape[1]):
            col = rhs[:, k]
            if np.iscomplexobj(col):
                out[:, k] = self._solve(col.real) + 1j * self._solve(col.imag)
            else:
                out[:, k] = self._solve(col)
        if not np.all(np.isfinite(out)):
            raise GreenError("non-finite solution")
        return out.reshape(f.shape)

    def operator(self, u: np.ndarray) -> np.ndarray:
        """``(Delta0 + 1) u = M^{-1} K u``."""
        u = np.asarray(u)
        Ku = self.K @ u.reshape(len(self.mass), -1)
        return (Ku / self.mass[:, None]).reshape(u.shape)

    def kernel(self) -> tuple[np.ndarray, float]:
        """Dense kernel ``G = K^{-1}`` and the asymmetry of the raw solve.

        The inverse comes from a dense Cholesky solve against the identity;
        the returned matrix is symmetrized and the pre-symmetrization
        residual ``max|G - G^T| / max|G|`` is reported alongside.
        """
        Kd = self.K.toarray()
        try:
            c = sla.cho_factor(Kd, lower=True, overwrite_a=True, check_finite=False)
            G = sla.cho_solve(c, np.eye(len(self.mass)), overwrite_b=True, check_finite=False)
        except sla.LinAlgError as exc:
            raise GreenError(f"dense Cholesky failed: {exc}") from exc
        del c, Kd
        scale = float(np.max(np.abs(G)))
        asym = float(np.max(np.abs(G - G.T))) / scale
        G += G.T
        G *= 0.5
        return G, asym


def green_apply(structure: HyperbolicStructure, f: np.ndarray) -> np.ndarray:
    """Solve ``(Delta0 + 1) u = f`` on the vertices of ``structure``."""
    return GreenOperator(structure).apply(f)


def green_kernel(structure: HyperbolicStructure) -> np.ndarray:
    """Dense symmetric kernel ``G`` with ``(Delta0 + 1) G = diag(dA)^{-1}``."""
    return GreenOperator(structure).kernel()[0]
