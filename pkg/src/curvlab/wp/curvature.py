"""Curvature of the Weil-Petersson geometry at one point of moduli space.

With ``P_ab = theta_a conj(theta_b)`` (functions on the surface) and the
bilinear pairing through the resolvent

    S[a, b, c, d] = integral (Delta0 + 1)^{-1}(P_ab) P_cd dA
                  = sum_{v,w} P_ab(v) dA_v G(v, w) dA_w P_cd(w),

the cotangent bundle with the Hodge metric has

    R_{i jbar alpha betabar} = S[beta, j, i, alpha] + S[beta, alpha, i, j]

and the tangent bundle with the Weil-Petersson metric has

    R_{i jbar k lbar} = -(S[k, l, i, j] + S[k, j, i, l]).

Both tensors are expressed in the frames dual to, respectively equal to,
the Beltrami basis ``theta_a``; :func:`orthonormal_frames` normalizes them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor_core import CurvatureTensor, change_frame, dual_tensor, orthonormalizing_frame
from .differentials import DifferentialBasis
from .green import GreenOperator


class StructureMismatch(ValueError):
    pass


def _check_same(basis: DifferentialBasis, green: GreenOperator):
    if basis.structure is not green.structure:
        raise StructureMismatch("basis and Green operator belong to different structures")


def resolvent_pairing(basis: DifferentialBasis, green: GreenOperator) -> np.ndarray:
    """``S[a, b, c, d]`` through the sparse factorization of ``K``."""
    _check_same(basis, green)
    n = basis.size
    P = basis.pairing().reshape(-1, n * n)
    MP = basis.structure.dA[:, None] * P
    X = green.apply(P)                     # K^{-1} M P
    S = MP.T @ X
    return S.reshape(n, n, n, n)


@dataclass(frozen=True)
class WPCurvature:
    """Cotangent (Hodge metric) and tangent (WP metric) curvature tensors."""

    cotangent: CurvatureTensor
    tangent: CurvatureTensor
    hermitian_residual: float
    exchange_residual: float
    alternative_hermitian_residual: float

    def to_dict(self) -> dict:
        return {"hermitian_residual": self.hermitian_residual,
                "exchange_residual": self.exchange_residual,
                "alternative_placement_hermitian_residual": self.alternative_hermitian_residual}


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def wolpert_curvature(basis: DifferentialBasis, structure=None,
                      green: GreenOperator | None = None) -> WPCurvature:
    """Assemble the cotangent tensor by vertex quadrature of both resolvent terms.

    Also reports the exchange residual ``R[i,j,a,b]`` versus ``R[a,j,i,b]`` and
    the Hermitian residual obtained with the barred and unbarred factors of
    each pairing swapped.
    """
    if structure is not None and structure is not basis.structure:
        raise StructureMismatch("basis was built on a different structure")
    green = GreenOperator(basis.structure) if green is None else green
    S = resolvent_pairing(basis, green)
    R = np.einsum("bjia->ijab", S) + np.einsum("baij->ijab", S)
    herm = _rel(R, np.conj(R.transpose(1, 0, 3, 2)))
    exch = _rel(R, R.transpose(2, 1, 0, 3))
    # barred factor first: S[a,i,j,b] + S[j,i,a,b]
    alt = np.einsum("aijb->ijab", S) + np.einsum("jiab->ijab", S)
    alt_herm = _rel(alt, np.conj(alt.transpose(1, 0, 3, 2)))
    tangent = tangent_curvature(basis, green=green)
    return WPCurvature(cotangent=CurvatureTensor(R, kahler=False), tangent=tangent,
                       hermitian_residual=herm, exchange_residual=exch,
                       alternative_hermitian_residual=alt_herm)


def tangent_curvature(basis: DifferentialBasis, structure=None,
                      green: GreenOperator | None = None) -> CurvatureTensor:
    """``R_{i jbar k lbar} = -integral (e_{ij} f_{kl} + e_{il} f_{kj}) dA``.

    ``f_{ij} = theta_i conj(theta_j)`` and ``e_{ij} = (Delta0 + 1)^{-1} f_{ij}``,
    each resolvent applied separately and integrated with the vertex masses.
    """
    if structure is not None and structure is not basis.structure:
        raise StructureMismatch("basis was built on a different structure")
    green = GreenOperator(basis.structure) if green is None else green
    _check_same(basis, green)
    n = basis.size
    f = basis.pairing()
    dA = basis.structure.dA
    e = np.empty_like(f)
    for i in range(n):
        for j in range(n):
            e[:, i, j] = green.apply(f[:, i, j])
    ef = np.einsum("v,vij,vkl->ijkl", dA, e, f)       # integral e_ij f_kl
    R = -(ef + np.einsum("ilkj->ijkl", ef))           # e_ij f_kl + e_il f_kj
    return CurvatureTensor(R, kahler=True)


def orthonormal_frames(basis: DifferentialBasis) -> np.ndarray:
    """``P`` with ``P^T G_WP conj(P) = I``: the WP-orthonormal tangent frame."""
    return orthonormalizing_frame(basis.gram_wp)


def normalized(curv: WPCurvature, basis: DifferentialBasis) -> tuple[CurvatureTensor, CurvatureTensor]:
    """Both tensors in orthonormal frames (tangent frame ``P``, coframe ``conj P``)."""
    P = orthonormal_frames(basis)
    cot = change_frame(curv.cotangent, P, np.conj(P), kahler=False)
    tan = change_frame(curv.tangent, P, P, kahler=True)
    return cot, tan


def duality_residual(curv: WPCurvature, basis: DifferentialBasis) -> float:
    """Relative mismatch of the tangent tensor and the dual of the cotangent one."""
    cot, tan = normalized(curv, basis)
    return _rel(dual_tensor(cot).entries, tan.entries)


def symmetrized_identity_check(basis: DifferentialBasis, structure, u_matrix: np.ndarray,
                               kernel: np.ndarray | None = None,
                               curvature: WPCurvature | None = None,
                               block: int = 512) -> tuple[float, float, float]:
    """Compare the dual-Nakano form of the cotangent tensor with its kernel integral.

    ``lhs = sum R[i,j,a,b] u[i,b] conj(u[j,a])`` and
    ``rhs = 1/2 sum_{w,z} G(z,w) |H(w,z) + H(z,w)|^2 dA_w dA_z`` with
    ``H(w,z) = sum u[i,b] theta_i(w) theta_b(z)``, evaluated in row blocks of
    the dense kernel.  Returns ``(lhs, rhs, relative residual)``.
    """
    if structure is not None and structure is not basis.structure:
        raise StructureMismatch("basis was built on a different structure")
    U = np.asarray(u_matrix, dtype=complex)
    if curvature is None:
        curvature = wolpert_curvature(basis)
    R = curvature.cotangent.entries
    lhs = float(np.einsum("ijab,ib,ja->", R, U, np.conj(U)).real)
    if kernel is None:
        kernel = GreenOperator(basis.structure).kernel()[0]
    th = basis.theta
    dA = basis.structure.dA
    A = th @ (U + U.T)                   # (H + H^T)[w, z] = A[w] . th[z]
    rhs = 0.0
    for s in range(0, len(dA), block):
        Hs = A[s:s + block] @ th.T
        rhs += float(np.sum(kernel[s:s + block] * (np.abs(Hs) ** 2)
                            * dA[s:s + block, None] * dA[None, :]))
    rhs *= 0.5
    scale = max(abs(lhs), abs(rhs))
    res = 0.0 if scale == 0 else abs(lhs - rhs) / scale
    return lhs, rhs, res
