"""Quadratic forms attached to a curvature tensor.

Conventions
-----------
Real tangent vectors of a Kähler manifold are 2n-vectors ``(x_1..x_n, y_1..y_n)``
with complex coordinate ``xi = x + i y``; their complexified components are
``(xi, conj(xi))`` in the basis ``(d/dz^1..d/dz^n, d/dzbar^1..d/dzbar^n)``.
With h = identity at the point, ``|d/dx^i|^2 = 2`` and the real metric is
``g(X, Y) = 2 Re <xi_X, xi_Y>``.

The Riemannian tensor follows ``g(R(X, Y)Z, W) = R(X, Y, Z, W)`` with
``R(d_i, dbar_j, d_k, dbar_l) = R_{i jbar k lbar}``, and the curvature operator
satisfies ``g(Rop(X ^ Y), Z ^ W) = R(X, Y, W, Z)``.  Under these choices the
holomorphic sectional curvature of the δ-model is exactly +-2.
"""

from __future__ import annotations

import numpy as np

from ..tensor_core import CurvatureTensor, TensorError


def _require_kahler(R: CurvatureTensor):
    if not R.kahler:
        raise TensorError("this notion needs a Kähler tensor (kahler flag set)")


def _nonzero(*vecs):
    for v in vecs:
        if not np.any(np.asarray(v) != 0):
            raise ValueError("input vectors must be nonzero")


# ---------------------------------------------------------------- Nakano type

def nakano_form(R: CurvatureTensor) -> np.ndarray:
    """``M[(i,a),(j,b)] = R[i,j,a,b]``; the form is ``vec(u)^T M conj(vec(u))``."""
    n, r = R.n, R.r
    return R.entries.transpose(0, 2, 1, 3).reshape(n * r, n * r)


def dual_nakano_form(R: CurvatureTensor) -> np.ndarray:
    """``M[(i,b),(j,a)] = R[i,j,a,b]``; the form is ``sum R u^{ib} conj(u^{ja})``."""
    n, r = R.n, R.r
    return R.entries.transpose(0, 3, 1, 2).reshape(n * r, n * r)


def nakano_value(R: CurvatureTensor, u) -> float:
    """``sum R_{i jbar a bbar} u^{ia} conj(u^{jb})`` for an n x r array u."""
    u = np.asarray(u, dtype=complex)
    return float(np.einsum("ijab,ia,jb->", R.entries, u, u.conj()).real)


def dual_nakano_value(R: CurvatureTensor, u) -> float:
    """``sum R_{i jbar a bbar} u^{ib} conj(u^{ja})`` for an n x r array u."""
    u = np.asarray(u, dtype=complex)
    return float(np.einsum("ijab,ib,ja->", R.entries, u, u.conj()).real)


# ------------------------------------------------------ Griffiths / bisectional

def griffiths_raw(R: CurvatureTensor, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return np.einsum("ijab,...i,...j,...a,...b->...", R.entries, u, u.conj(), v, v.conj()).real


def griffiths_value(R: CurvatureTensor, u, v) -> float:
    """Griffiths form at (u, v), normalized by ``|u|^2 |v|^2``."""
    _nonzero(u, v)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return float(griffiths_raw(R, u, v) / (np.vdot(u, u).real * np.vdot(v, v).real))


def bisectional_value(R: CurvatureTensor, u, v) -> float:
    """Holomorphic bisectional curvature R(u, ubar, v, vbar) / (|u|^2 |v|^2)."""
    _require_kahler(R)
    return griffiths_value(R, u, v)


def holo_sectional_value(R: CurvatureTensor, u) -> float:
    return griffiths_value(R, u, u)


# ------------------------------------------------------------ complex sectional

def sectional_matrix(a, b, c, d) -> np.ndarray:
    """``A^{i jbar} = a^i conj(c^j) - b^j conj(d^i)`` (batched over leading axes)."""
    a, b, c, d = (np.asarray(x, dtype=complex) for x in (a, b, c, d))
    return a[..., :, None] * c.conj()[..., None, :] - d.conj()[..., :, None] * b[..., None, :]


def complex_sectional_raw(R: CurvatureTensor, Z, W) -> np.ndarray:
    """R(Z, Wbar, W, Zbar) for Z = (a, b), W = (c, d) in C^{2n}, via the rank-2 matrix A."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    n = R.n
    A = sectional_matrix(Z[..., :n], Z[..., n:], W[..., :n], W[..., n:])
    # R_{i jbar k lbar} A^{i lbar} conj(A^{j kbar})
    return np.einsum("ijkl,...il,...jk->...", R.entries, A, A.conj()).real


def complex_sectional_value(R: CurvatureTensor, Z, W) -> float:
    """Complex sectional curvature normalized by ``|Z|^2 |W|^2`` (coordinate norms)."""
    _require_kahler(R)
    _nonzero(Z, W)
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    return float(complex_sectional_raw(R, Z, W) / (np.vdot(Z, Z).real * np.vdot(W, W).real))


def siu_raw(R: CurvatureTensor, A, B, C, D) -> np.ndarray:
    A, B, C, D = (np.asarray(x, dtype=complex) for x in (A, B, C, D))
    M = A[..., :, None] * B.conj()[..., None, :] - C[..., :, None] * D.conj()[..., None, :]
    # R_{i jbar k lbar} M^{i j} conj(M^{l k})
    return np.einsum("ijkl,...ij,...lk->...", R.entries, M, M.conj()).real


def siu_form_value(R: CurvatureTensor, A, B, C, D) -> float:
    """Siu's form at ``A Bbar - C Dbar``, normalized by ``(|A|^2+|D|^2)(|B|^2+|C|^2)``.

    The normalization matches ``complex_sectional_value`` under
    ``Z = (A, conj D)``, ``W = (B, conj C)``.
    """
    _require_kahler(R)
    A, B, C, D = (np.asarray(x, dtype=complex) for x in (A, B, C, D))
    nz = (np.vdot(A, A) + np.vdot(D, D)).real
    nw = (np.vdot(B, B) + np.vdot(C, C)).real
    if nz == 0 or nw == 0:
        raise ValueError("degenerate Siu arguments")
    return float(siu_raw(R, A, B, C, D) / (nz * nw))


def siu_from_sectional(Z, W, n: int):
    """Map (Z, W) to the Siu arguments (A, B, C, D) with equal form values."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    return Z[..., :n], W[..., :n], W[..., n:].conj(), Z[..., n:].conj()


def sectional_from_siu(A, B, C, D):
    A, B, C, D = (np.asarray(x, dtype=complex) for x in (A, B, C, D))
    return np.concatenate([A, D.conj()], axis=-1), np.concatenate([B, C.conj()], axis=-1)


# ------------------------------------------------ full complexified tensor

def complexified_tensor(R: CurvatureTensor) -> np.ndarray:
    """All components ``F[p, q, s, t]`` of the complexified Riemannian tensor.

    Indices run over ``(d_1..d_n, dbar_1..dbar_n)``; only the mixed-type
    blocks are nonzero on a Kähler manifold.
    """
    _require_kahler(R)
    n = R.n
    e = R.entries
    F = np.zeros((2 * n,) * 4, dtype=complex)
    h, a = slice(0, n), slice(n, 2 * n)
    F[h, a, h, a] = e
    F[a, h, h, a] = -e.transpose(1, 0, 2, 3)
    F[h, a, a, h] = -e.transpose(0, 1, 3, 2)
    F[a, h, a, h] = e.transpose(1, 0, 3, 2)
    return F


def complexify_real(X) -> np.ndarray:
    """Real 2n-vector(s) ``(x, y)`` -> complexified components ``(xi, conj xi)``."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1] // 2
    xi = X[..., :n] + 1j * X[..., n:]
    return np.concatenate([xi, xi.conj()], axis=-1)


def complexify_complex(V) -> np.ndarray:
    """Complex vector(s) in T_C M given by real-basis coefficients (complex 2n-vectors)."""
    V = np.asarray(V, dtype=complex)
    n = V.shape[-1] // 2
    x, y = V[..., :n], V[..., n:]
    return np.concatenate([x + 1j * y, x - 1j * y], axis=-1)


def real_inner(X, Y) -> np.ndarray:
    """``g(X, Y) = 2 Re <xi_X, xi_Y>`` = twice the Euclidean product."""
    return 2.0 * np.sum(np.asarray(X, float) * np.asarray(Y, float), axis=-1)


def riemann_4(F: np.ndarray, X, Y, Z, W) -> np.ndarray:
    """Multilinear evaluation of a complexified tensor on complexified components."""
    return np.einsum("pqst,...p,...q,...s,...t->...", F, X, Y, Z, W)


def riemannian_sectional_value(R: CurvatureTensor, X, Y) -> float:
    """K(X, Y) = R(X, Y, Y, X) / (|X|^2 |Y|^2 - <X, Y>^2) for real 2n-vectors."""
    _require_kahler(R)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    den = real_inner(X, X) * real_inner(Y, Y) - real_inner(X, Y) ** 2
    if den <= 1e-14 * real_inner(X, X) * real_inner(Y, Y):
        raise ValueError("X and Y are linearly dependent")
    num = complex_sectional_raw(R, complexify_real(X), complexify_real(Y))
    return float(num / den)


# ------------------------------------------------------- curvature operator

def lambda2_basis(n: int):
    """Ordered basis of Λ^2(R^{2n}) as (label, index_1, index_2) real-coordinate pairs.

    x^i ^ x^j (i<j), then x^p ^ y^q (all p, q), then y^m ^ y^n (m<n); coordinate
    index ``k`` is x^{k+1} for k < n and y^{k-n+1} otherwise.
    """
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            out.append(("xx", i, j))
    for p in range(n):
        for q in range(n):
            out.append(("xy", p, n + q))
    for m in range(n):
        for k in range(m + 1, n):
            out.append(("yy", n + m, n + k))
    return out


BASIS_NORM_SQ = 4.0  # g(e_p ^ e_q, e_p ^ e_q) for distinct real coordinate vectors


def curvature_operator_gram(R: CurvatureTensor) -> np.ndarray:
    """``Q[a, b] = Rop(e_a, e_b) = R(X_a, Y_a, W_b, Z_b)`` in the Λ^2 basis."""
    F = complexified_tensor(R)
    n = R.n
    basis = lambda2_basis(n)
    E = complexify_real(np.eye(2 * n))
    Xs = np.array([E[p] for _, p, _ in basis])
    Ys = np.array([E[q] for _, _, q in basis])
    # R(X_a, Y_a, Y_b, X_b) with e_b = X_b ^ Y_b  (Z_b = X_b, W_b = Y_b)
    Q = np.einsum("pqst,ap,aq,bs,bt->ab", F, Xs, Ys, Ys, Xs)
    if np.max(np.abs(Q.imag)) > 1e-10 * max(1.0, np.max(np.abs(Q))):
        raise ArithmeticError("curvature operator came out non-real")
    Q = Q.real
    return 0.5 * (Q + Q.T)


def real_curvature_operator(R: CurvatureTensor) -> np.ndarray:
    """Symmetric matrix of Rop in the orthonormalized Λ^2 basis (dimension n(2n-1))."""
    _require_kahler(R)
    return curvature_operator_gram(R) / BASIS_NORM_SQ


def bivector_blocks(v, n: int):
    """Split basis coefficients into full n x n arrays (a, b, c) with a, c strictly upper."""
    v = np.asarray(v, dtype=float)
    a = np.zeros(v.shape[:-1] + (n, n))
    c = np.zeros_like(a)
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    a[..., iu[0], iu[1]] = v[..., :m]
    b = v[..., m:m + n * n].reshape(v.shape[:-1] + (n, n))
    c[..., iu[0], iu[1]] = v[..., m + n * n:]
    return a, b, c


def operator_B(v, n: int) -> np.ndarray:
    """Mixed-type component B^{i jbar} = E + iF of a real bivector, E = a+c-a^T-c^T, F = -b-b^T."""
    a, b, c = bivector_blocks(v, n)
    sw = lambda m: np.swapaxes(m, -1, -2)
    E = a + c - sw(a) - sw(c)
    F = -b - sw(b)
    return E + 1j * F


def operator_value_from_B(R: CurvatureTensor, v) -> np.ndarray:
    """Rop(V, V) = -R_{i jbar k lbar} B^{i jbar} B^{k lbar} for basis coefficients v."""
    _require_kahler(R)
    B = operator_B(v, R.n)
    val = -np.einsum("ijkl,...ij,...kl->...", R.entries, B, B)
    return val.real


def operator_value_from_matrix(R: CurvatureTensor, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    Q = curvature_operator_gram(R)
    return np.einsum("...a,ab,...b->...", v, Q, v)


# -------------------------------------------------------------- isotropic

def isotropic_pair(frame) -> tuple[np.ndarray, np.ndarray]:
    """``(v, w) = (e1 + i e2, e3 + i e4)`` from a real (..., 2n, 4) frame."""
    frame = np.asarray(frame, dtype=float)
    v = frame[..., :, 0] + 1j * frame[..., :, 1]
    w = frame[..., :, 2] + 1j * frame[..., :, 3]
    return v, w


def isotropic_raw(R: CurvatureTensor, frame) -> np.ndarray:
    """g(Rop(v ^ w), conj(v ^ w)) = R(v, w, wbar, vbar), evaluated as R(Z, Wbar, W, Zbar)
    with Z = v and W = wbar."""
    v, w = isotropic_pair(frame)
    return complex_sectional_raw(R, complexify_complex(v), complexify_complex(w.conj()))


def isotropic_value(R: CurvatureTensor, frame) -> float:
    """Isotropic curvature for a real frame, orthonormalized in the metric g."""
    _require_kahler(R)
    frame = np.asarray(frame, dtype=float)
    if R.n < 2:
        raise ValueError("isotropic curvature needs complex dimension >= 2")
    q, rr = np.linalg.qr(frame)
    if np.min(np.abs(np.diag(rr))) < 1e-12:
        raise ValueError("frame vectors are linearly dependent")
    q = q * np.sign(np.diag(rr))
    return float(isotropic_raw(R, q / np.sqrt(2.0)))
