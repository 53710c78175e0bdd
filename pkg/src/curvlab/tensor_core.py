"""Pointwise curvature tensors of Hermitian holomorphic bundles.

Every tensor is stored in an adapted frame where the metric is the identity
at the evaluation point, as a complex array ``R[i, j, a, b]`` standing for
the component R_{i jbar a bbar}.  The (sqrt(-1)/2pi) prefactor of the
curvature form is dropped; positive rescalings never change a sign class.

For a Kähler tangent bundle (``kahler=True``) the fiber and base indices
coincide (r == n) and ``R[i, j, k, l] == R[k, j, i, l] == R[i, l, k, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_RTOL = 1e-10
VALIDATE_TOL = 1e-12

SIGN_CLASSES = ("unconstrained", "semi-dual-nakano-negative", "semi-nakano-negative")


class TensorError(ValueError):
    """Invalid curvature tensor or metric jet."""


def _frozen(a: np.ndarray, dtype=complex) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def hermitian_conjugate(entries: np.ndarray) -> np.ndarray:
    """Return ``conj(R[j, i, b, a])`` laid out as ``[i, j, a, b]``."""
    return np.conj(entries.transpose(1, 0, 3, 2))


@dataclass(frozen=True)
class CurvatureTensor:
    """Curvature R_{i jbar a bbar} of a rank-r bundle over an n-dimensional base."""

    entries: np.ndarray
    kahler: bool = False
    n: int = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        e = _frozen(self.entries)
        if e.ndim != 4 or e.shape[0] != e.shape[1] or e.shape[2] != e.shape[3]:
            raise TensorError(f"expected shape (n, n, r, r), got {e.shape}")
        if 0 in e.shape:
            raise TensorError("dimensions must be positive")
        if self.kahler and e.shape[0] != e.shape[2]:
            raise TensorError("a Kähler tensor needs r == n")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "n", e.shape[0])
        object.__setattr__(self, "r", e.shape[2])

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def scale(self, c: float) -> "CurvatureTensor":
        return CurvatureTensor(c * self.entries, kahler=self.kahler)

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.entries + other.entries,
                               kahler=self.kahler and other.kahler)

    def __sub__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return self + other.scale(-1.0)

    def __neg__(self) -> "CurvatureTensor":
        return self.scale(-1.0)

    def hermitian_residual(self) -> float:
        return float(np.max(np.abs(self.entries - hermitian_conjugate(self.entries))))

    def kahler_residual(self) -> float:
        e = self.entries
        return float(max(np.max(np.abs(e - e.transpose(2, 1, 0, 3))),
                         np.max(np.abs(e - e.transpose(0, 3, 2, 1)))))


def zero_tensor(n: int, r: int | None = None, kahler: bool | None = None) -> CurvatureTensor:
    r = n if r is None else r
    kahler = (r == n) if kahler is None else kahler
    return CurvatureTensor(np.zeros((n, n, r, r), dtype=complex), kahler=kahler)


@dataclass(frozen=True)
class HermitianMetricJet:
    """Two-jet of a Hermitian metric at a point.

    ``h[a, b]`` is h_{a bbar}; ``dh[i, a, b]`` is d h_{a bbar} / dz^i;
    ``ddh[i, j, a, b]`` is d^2 h_{a bbar} / dz^i dzbar^j.  The antiholomorphic
    first derivatives follow from Hermitian symmetry and are not stored.
    """

    h: np.ndarray
    dh: np.ndarray
    ddh: np.ndarray
    n: int = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        h, dh, ddh = _frozen(self.h), _frozen(self.dh), _frozen(self.ddh)
        r = h.shape[0]
        if h.shape != (r, r) or dh.ndim != 3 or dh.shape[1:] != (r, r):
            raise TensorError("inconsistent jet shapes")
        n = dh.shape[0]
        if ddh.shape != (n, n, r, r):
            raise TensorError(f"ddh must have shape {(n, n, r, r)}, got {ddh.shape}")
        if np.max(np.abs(h - h.conj().T)) > VALIDATE_TOL * max(1.0, np.max(np.abs(h))):
            raise TensorError("h is not Hermitian")
        scale = max(1.0, float(np.max(np.abs(ddh))) if ddh.size else 1.0)
        if np.max(np.abs(ddh - hermitian_conjugate(ddh))) > VALIDATE_TOL * scale:
            raise TensorError("ddh violates ddh[i,j,a,b] == conj(ddh[j,i,b,a])")
        if np.min(np.linalg.eigvalsh(h)) <= 0:
            raise TensorError("h is not positive definite")
        for name, val in (("h", h), ("dh", dh), ("ddh", ddh)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "r", r)

    def dh_bar(self) -> np.ndarray:
        """``out[j, g, b]`` = d h_{g bbar} / dzbar^j = conj(dh[j, b, g])."""
        return np.conj(self.dh.transpose(0, 2, 1))


def curvature_from_jet(jet: HermitianMetricJet) -> CurvatureTensor:
    """Chern curvature from the metric two-jet.

    R_{i jbar a bbar} = -d_i dbar_j h_{a bbar} + h^{g dbar} (d_i h_{a dbar})(dbar_j h_{g bbar}).
    """
    # h^{g dbar} h_{a dbar} = delta  =>  h^{g dbar} = inv(h)[d, g]
    hinv = np.linalg.inv(jet.h)
    conn = np.einsum("dg,iad,jgb->ijab", hinv, jet.dh, jet.dh_bar())
    e = -jet.ddh + conn
    # average with the Hermitian partner so the result is exactly Hermitian
    e = 0.5 * (e + hermitian_conjugate(e))
    return CurvatureTensor(e, kahler=False)


def model_fubini_study(n: int) -> CurvatureTensor:
    """R_{i jbar k lbar} = delta_ij delta_kl + delta_il delta_kj (holomorphic sectional 2)."""
    if n < 1:
        raise TensorError("n must be >= 1")
    d = np.eye(n)
    e = np.einsum("ij,kl->ijkl", d, d) + np.einsum("il,kj->ijkl", d, d)
    return CurvatureTensor(e.astype(complex), kahler=True)


def model_complex_ball(n: int) -> CurvatureTensor:
    return model_fubini_study(n).scale(-1.0)


def kahler_symmetrize(e: np.ndarray) -> np.ndarray:
    """Project onto Kähler tensors; the output symmetries hold bit-exactly."""
    e = e + e.transpose(2, 1, 0, 3)
    e = e + e.transpose(0, 3, 2, 1)
    e = 0.25 * e
    return 0.5 * (e + hermitian_conjugate(e))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_kahler_tensor(seed, n: int, sign_class: str = "unconstrained",
                         terms: int | None = None) -> CurvatureTensor:
    """Random Kähler curvature tensor in a prescribed sign class.

    ``semi-dual-nakano-negative`` sums -sym(T_{il} conj(T_{jk})) over random
    Hermitian positive semidefinite T; ``semi-nakano-negative`` sums
    -S_{ik} conj(S_{jl}) over random complex symmetric S.  Both are Gram sums,
    so class membership holds by construction.
    """
    if sign_class not in SIGN_CLASSES:
        raise TensorError(f"unknown sign class {sign_class!r}; expected one of {SIGN_CLASSES}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if sign_class == "unconstrained":
        return CurvatureTensor(kahler_symmetrize(_complex_normal(rng, (n,) * 4)), kahler=True)

    terms = int(rng.integers(1, n * n + 1)) if terms is None else terms
    e = np.zeros((n,) * 4, dtype=complex)
    for _ in range(terms):
        if sign_class == "semi-dual-nakano-negative":
            rank = int(rng.integers(1, n + 1))
            c = _complex_normal(rng, (n, rank))
            t = c @ c.conj().T
            # sym_(i,k)(T_il conj(T_jk)); T Hermitian so conj(T_jk) = T_kj
            term = 0.5 * (np.einsum("il,kj->ijkl", t, t) + np.einsum("kl,ij->ijkl", t, t))
        else:
            s = _complex_normal(rng, (n, n))
            s = s + s.T
            term = np.einsum("ik,jl->ijkl", s, s.conj())
        e -= term
    # the Gram terms are already Kähler; this only removes rounding asymmetry
    return CurvatureTensor(kahler_symmetrize(e), kahler=True)


def random_adapted_jet(seed, n: int, r: int, sign_class: str = "unconstrained",
                       terms: int | None = None) -> HermitianMetricJet:
    """Jet with h = identity at the point.

    For ``semi-nakano-negative`` the second derivatives are chosen so that
    the ambient curvature equals minus a random Nakano-Gram sum.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dh = _complex_normal(rng, (n, r, r))
    h = np.eye(r, dtype=complex)
    conn = np.einsum("iad,jbd->ijab", dh, dh.conj())
    if sign_class == "unconstrained":
        x = _complex_normal(rng, (n, n, r, r))
        ddh = 0.5 * (x + hermitian_conjugate(x))
    elif sign_class == "semi-nakano-negative":
        terms = int(rng.integers(1, n * r + 1)) if terms is None else terms
        vs = _complex_normal(rng, (terms, n, r))
        gram = np.einsum("sia,sjb->ijab", vs, vs.conj())
        ddh = conn + gram
    else:
        raise TensorError(f"unsupported jet sign class {sign_class!r}")
    ddh = 0.5 * (ddh + hermitian_conjugate(ddh))
    return HermitianMetricJet(h, dh, ddh)


def subbundle_curvature(R_E: CurvatureTensor, jet: HermitianMetricJet, s: int):
    """Curvature of the subbundle spanned by the first ``s`` frame vectors.

    Returns ``(R_S, correction)`` with ``R_E|_S - R_S == correction`` and
    correction_{i jbar a bbar} = sum_{g >= s} (d_i h_{a gbar})(dbar_j h_{g bbar}),
    whose Nakano form is positive semidefinite.
    """
    if not 1 <= s < jet.r:
        raise TensorError(f"need 1 <= s < r = {jet.r}, got s = {s}")
    if (R_E.n, R_E.r) != (jet.n, jet.r):
        raise TensorError("tensor and jet dimensions differ")
    if np.max(np.abs(jet.h - np.eye(jet.r))) > VALIDATE_TOL:
        raise TensorError("frame is not adapted: h at the point is not the identity")
    quot = jet.dh[:, :s, s:]
    corr = np.einsum("iag,jbg->ijab", quot, quot.conj())
    corr = 0.5 * (corr + hermitian_conjugate(corr))
    R_S = R_E.entries[:, :, :s, :s] - corr
    return CurvatureTensor(R_S), CurvatureTensor(corr)


def dual_tensor(R: CurvatureTensor) -> CurvatureTensor:
    """Curvature of the dual bundle in the dual frame: R*_{i jbar a bbar} = -R_{i jbar b abar}."""
    return CurvatureTensor(-R.entries.transpose(0, 1, 3, 2), kahler=False)


def change_frame(R: CurvatureTensor, base: np.ndarray, fiber: np.ndarray | None = None,
                 kahler: bool | None = None) -> CurvatureTensor:
    """Components in the frame ``e'_i = sum_a base[a, i] e_a`` (likewise ``fiber``)."""
    base = np.asarray(base, dtype=complex)
    fiber = base if fiber is None else np.asarray(fiber, dtype=complex)
    e = np.einsum("ai,bj,ck,dl,abcd->ijkl", base, base.conj(), fiber, fiber.conj(), R.entries)
    e = 0.5 * (e + hermitian_conjugate(e))
    kahler = (R.kahler and fiber is base) if kahler is None else kahler
    return CurvatureTensor(e, kahler=kahler)


def orthonormalizing_frame(gram: np.ndarray) -> np.ndarray:
    """Matrix P with ``P^T gram conj(P) = I`` for ``gram[a, b] = <e_a, e_b>``."""
    gram = np.asarray(gram, dtype=complex)
    w, v = np.linalg.eigh(gram)
    if np.min(w) <= 0:
        raise TensorError("Gram matrix is not positive definite")
    # conj(P) = gram^{-1/2}
    return np.conj((v * w ** -0.5) @ v.conj().T)


def validate(R: CurvatureTensor, tol: float = VALIDATE_TOL) -> list[str]:
    """Symmetry violations of ``R``, relative to its max-norm; empty when valid."""
    e = R.entries
    scale = max(1.0, R.max_norm)
    out = []
    if not np.all(np.isfinite(e)):
        out.append("non-finite entries")
        return out
    herm = np.abs(e - hermitian_conjugate(e))
    for idx in zip(*np.nonzero(herm > tol * scale)):
        i, j, a, b = (int(x) for x in idx)
        if (i, a) <= (j, b):
            out.append(f"hermitian: R[{i+1},{j+1},{a+1},{b+1}] != conj(R[{j+1},{i+1},{b+1},{a+1}])"
                       f" (|diff| = {herm[idx]:.3e})")
    if R.kahler:
        for name, perm in (("swap i<->k", (2, 1, 0, 3)), ("swap j<->l", (0, 3, 2, 1))):
            diff = np.abs(e - e.transpose(perm))
            seen = set()
            for idx in zip(*np.nonzero(diff > tol * scale)):
                key = frozenset((idx, tuple(np.array(idx)[list(perm)])))
                if key in seen:
                    continue
                seen.add(key)
                out.append(f"kahler {name}: R[{','.join(str(int(x) + 1) for x in idx)}]"
                           f" (|diff| = {diff[idx]:.3e})")
    return out
