"""Multistart search for extremal values of curvature forms on non-convex domains.

Every sampled notion is a form restricted to a product of unit spheres, to
orthonormal real 2-frames (sectional curvature), or to orthonormal real
4-frames (isotropic curvature).  The driver samples the domain uniformly,
keeps the best points as starts and refines them.

Two refiners are available.  ``"block"`` (default) exploits that each form
is quadratic in every vector block when the others are fixed: the block
form is recovered numerically by polarization and the block is replaced by
an extremal eigenvector, which never decreases the objective.  Isotropic
frames are refined by Givens-rotation sweeps, maximizing the exact
trigonometric polynomial along each rotation plane.  ``"gradient"`` is a
plain projected-gradient ascent with central-difference gradients and step
halving; it is much slower and kept for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..tensor_core import CurvatureTensor, TensorError
from . import forms

SAMPLED_NOTIONS = ("griffiths", "bisectional", "complex_sectional",
                   "riemannian_sectional", "siu_strong", "isotropic")

MAX_SWEEPS = 200


@dataclass(frozen=True)
class Problem:
    """Objective over flat real parameters of length ``dim``.

    ``raw`` is the unnormalized form (homogeneous quadratic in each block);
    ``value`` is ``raw`` after projection onto the domain.
    """

    kind: str                 # "spheres" | "plane" | "stiefel"
    dim: int
    blocks: tuple             # (start, length) real slices of the sphere factors
    project: Callable[[np.ndarray], np.ndarray]
    raw: Callable[[np.ndarray], np.ndarray]
    witness: Callable[[np.ndarray], dict]

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.raw(self.project(x))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return self.project(rng.standard_normal((m, self.dim)))


def _complex_blocks(x: np.ndarray, sizes) -> list[np.ndarray]:
    out, k = [], 0
    for m in sizes:
        out.append(x[..., k:k + m] + 1j * x[..., k + m:k + 2 * m])
        k += 2 * m
    return out


def _sphere_blocks(sizes):
    blocks, k = [], 0
    for m in sizes:
        blocks.append((k, 2 * m))
        k += 2 * m
    return tuple(blocks)


def _normalize(x: np.ndarray, blocks) -> np.ndarray:
    x = np.array(x, dtype=float, copy=True)
    for k, m in blocks:
        blk = x[..., k:k + m]
        nrm = np.linalg.norm(blk, axis=-1, keepdims=True)
        x[..., k:k + m] = blk / np.where(nrm == 0, 1.0, nrm)
    return x


def _hform(M: np.ndarray):
    """Batched ``w^T M conj(w)`` through a matrix product."""
    def f(w):
        return np.einsum("...p,...p->...", w @ M, w.conj()).real
    return f


def _sphere_problem(sizes, raw_of_blocks, names):
    blocks = _sphere_blocks(sizes)
    dim = 2 * sum(sizes)

    def project(x):
        return _normalize(x, blocks)

    def raw(x):
        return raw_of_blocks(*_complex_blocks(x, sizes))

    def witness(x):
        return dict(zip(names, _complex_blocks(project(x), sizes)))

    return Problem("spheres", dim, blocks, project, raw, witness)


def _orthonormal_columns(m: np.ndarray) -> np.ndarray:
    """Q factor with positive-diagonal R (so equal to Gram-Schmidt on the columns)."""
    q, r = np.linalg.qr(m)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0, 1.0, d)
    return q * d[..., None, :]


def _gram_schmidt(m: np.ndarray) -> np.ndarray:
    """Twice-iterated Gram-Schmidt on few columns; cheaper than batched QR for many small frames."""
    cols = []
    for k in range(m.shape[-1]):
        v = m[..., k]
        for _ in range(2):
            for c in cols:
                v = v - np.sum(c * v, axis=-1, keepdims=True) * c
        cols.append(v / np.linalg.norm(v, axis=-1, keepdims=True))
    return np.stack(cols, axis=-1)


def make_problem(notion: str, R: CurvatureTensor) -> Problem:
    n, r = R.n, R.r
    if notion not in SAMPLED_NOTIONS:
        raise ValueError(f"unknown sampled notion {notion!r}")
    if notion != "griffiths" and not R.kahler:
        raise TensorError(f"{notion} needs a Kähler tensor")

    if notion in ("griffiths", "bisectional"):
        q = _hform(forms.nakano_form(R))

        def raw_gb(u, v):
            w = u[..., :, None] * v[..., None, :]
            return q(w.reshape(w.shape[:-2] + (n * r,)))
        return _sphere_problem((n, r), raw_gb, ("u", "v"))

    dn = _hform(forms.dual_nakano_form(R))

    def sectional_raw(Z, W):
        A = forms.sectional_matrix(Z[..., :n], Z[..., n:], W[..., :n], W[..., n:])
        return dn(A.reshape(A.shape[:-2] + (n * n,)))

    if notion == "complex_sectional":
        return _sphere_problem((2 * n, 2 * n), sectional_raw, ("Z", "W"))

    if notion == "siu_strong":
        # spheres over (A, D) and (B, C); see forms.siu_form_value for the scaling
        sq = _hform(R.entries.transpose(0, 1, 3, 2).reshape(n * n, n * n))

        def raw_siu(AD, BC):
            A, D, B, C = AD[..., :n], AD[..., n:], BC[..., :n], BC[..., n:]
            M = A[..., :, None] * B.conj()[..., None, :] - C[..., :, None] * D.conj()[..., None, :]
            return sq(M.reshape(M.shape[:-2] + (n * n,)))

        p = _sphere_problem((2 * n, 2 * n), raw_siu, ("AD", "BC"))

        def witness(x):
            AD, BC = _complex_blocks(p.project(x), (2 * n, 2 * n))
            return {"A": AD[:n], "B": BC[:n], "C": BC[n:], "D": AD[n:]}
        return Problem(p.kind, p.dim, p.blocks, p.project, p.raw, witness)

    if notion == "riemannian_sectional":
        m = 2 * n

        def project(x):
            X = x[..., :m]
            Y = x[..., m:]
            X = X / np.linalg.norm(X, axis=-1, keepdims=True)
            Y = Y - np.sum(X * Y, axis=-1, keepdims=True) * X
            Y = Y / np.linalg.norm(Y, axis=-1, keepdims=True)
            return np.concatenate([X, Y], axis=-1)

        def raw_k(x):
            # R(X, Y, Y, X) / (|X|_g^2 |Y|_g^2); exact K for Euclidean-orthonormal X, Y
            Z = forms.complexify_real(x[..., :m])
            W = forms.complexify_real(x[..., m:])
            return sectional_raw(Z, W) / 4.0

        def witness(x):
            x = project(x)
            return {"X": x[:m], "Y": x[m:]}
        return Problem("plane", 2 * m, ((0, m), (m, m)), project, raw_k, witness)

    # isotropic
    if n < 2:
        raise ValueError("isotropic curvature needs complex dimension >= 2")
    m = 2 * n

    def project(x):
        q = _gram_schmidt(x.reshape(x.shape[:-1] + (m, 4)))
        return q.reshape(x.shape)

    def raw_iso(x):
        # R(Z, Wbar, W, Zbar) at Z = v, W = wbar, expanded in the complex coordinates
        # xi_k of the frame vectors: A = (P (x) Q' - Q (x) P') / 2 with
        # P = xi_1 + i xi_2, Q = xi_3 + i xi_4 and primes on the conjugated xi
        fr = x.reshape(x.shape[:-1] + (m, 4))
        xi = fr[..., :n, :] + 1j * fr[..., n:, :]
        xc = xi.conj()
        P, Q = xi[..., 0] + 1j * xi[..., 1], xi[..., 2] + 1j * xi[..., 3]
        Pc, Qc = xc[..., 0] + 1j * xc[..., 1], xc[..., 2] + 1j * xc[..., 3]
        A = 0.5 * (P[..., :, None] * Qc[..., None, :] - Q[..., :, None] * Pc[..., None, :])
        return dn(A.reshape(A.shape[:-2] + (n * n,)))

    def witness(x):
        return {"frame": project(x).reshape(m, 4)}
    return Problem("stiefel", 4 * m, (), project, raw_iso, witness)


def evaluate_witness(notion: str, R: CurvatureTensor, w: dict) -> float:
    """Re-evaluate a sampled-notion witness through the public form functions."""
    if notion == "griffiths":
        return forms.griffiths_value(R, w["u"], w["v"])
    if notion == "bisectional":
        return forms.bisectional_value(R, w["u"], w["v"])
    if notion == "complex_sectional":
        return forms.complex_sectional_value(R, w["Z"], w["W"])
    if notion == "siu_strong":
        return forms.siu_form_value(R, w["A"], w["B"], w["C"], w["D"])
    if notion == "riemannian_sectional":
        return forms.riemannian_sectional_value(R, w["X"], w["Y"])
    if notion == "isotropic":
        return forms.isotropic_value(R, w["frame"])
    raise ValueError(f"unknown sampled notion {notion!r}")


# ------------------------------------------------------------------ refiners

def _polarized_block_form(problem: Problem, x: np.ndarray, start: int, m: int) -> np.ndarray:
    """Symmetric Q with ``raw(x with block = z) == z^T Q z`` for each row of x."""
    iu, ju = np.triu_indices(m, 1)
    probes = np.concatenate([np.eye(m), np.eye(m)[iu] + np.eye(m)[ju]])
    pts = np.repeat(x[:, None, :], len(probes), axis=1)
    pts[:, :, start:start + m] = probes
    vals = problem.raw(pts)
    Q = np.empty((x.shape[0], m, m))
    diag = vals[:, :m]
    Q[:, np.arange(m), np.arange(m)] = diag
    off = 0.5 * (vals[:, m:] - diag[:, iu] - diag[:, ju])
    Q[:, iu, ju] = off
    Q[:, ju, iu] = off
    return Q


def _extremal_vec(Q: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Top eigenvector of ``sign * Q`` for each row."""
    w, v = np.linalg.eigh(Q)
    return np.where(sign[:, None] > 0, v[:, :, -1], v[:, :, 0])


def _block_sweep(problem: Problem, x: np.ndarray, sign: np.ndarray) -> np.ndarray:
    if problem.kind == "spheres":
        for start, m in problem.blocks:
            Q = _polarized_block_form(problem, x, start, m)
            x[:, start:start + m] = _extremal_vec(Q, sign)
        return x
    # plane: each of X, Y moves in the orthogonal complement of the other.  The
    # form is compressed to that complement and the other vector is pushed to
    # the far end of the spectrum, so the extremal eigenvector avoids it.
    (s0, m), (s1, _) = problem.blocks
    for cur, other in ((s0, s1), (s1, s0)):
        Q = _polarized_block_form(problem, x, cur, m)
        Y = x[:, other:other + m]
        Pr = np.eye(m) - Y[:, :, None] * Y[:, None, :]
        shift = (np.linalg.norm(Q, axis=(1, 2)) + 1.0) * sign
        Qr = Pr @ Q @ Pr - shift[:, None, None] * (Y[:, :, None] * Y[:, None, :])
        x[:, cur:cur + m] = _extremal_vec(Qr, sign)
    return problem.project(x)


_TRIG_NODES = 2 * np.pi * np.arange(9) / 9
_K = np.arange(5.0)
_GRID = np.linspace(0.0, 2 * np.pi, 121)[:-1]
# real least-squares-free interpolation: samples -> (a_0..a_4, b_1..b_4)
_TRIG_FIT = np.linalg.inv(np.concatenate(
    [np.cos(np.outer(_TRIG_NODES, _K)), np.sin(np.outer(_TRIG_NODES, _K[1:]))], axis=1))
_GRID_BASIS = np.concatenate([np.cos(np.outer(_K, _GRID)), np.sin(np.outer(_K[1:], _GRID))])


def _trig_argmax(samples: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Angle maximizing ``sign *`` the degree-4 trig polynomial through 9 equispaced samples."""
    coef = (sign[:, None] * samples) @ _TRIG_FIT.T            # (b, 9)
    a, bb = coef[:, :5], coef[:, 5:]
    theta = _GRID[np.argmax(coef @ _GRID_BASIS, axis=1)]
    k = _K[1:]
    for _ in range(2):
        kt = theta[:, None] * k
        c, s = np.cos(kt), np.sin(kt)
        d1 = np.sum(k * (bb * c - a[:, 1:] * s), axis=1)
        d2 = -np.sum(k * k * (a[:, 1:] * c + bb * s), axis=1)
        ok = d2 < 0
        theta = np.where(ok, theta - d1 / np.where(ok, d2, 1.0), theta)
    kt = theta[:, None] * k
    here = np.sum(a[:, 1:] * np.cos(kt) + bb * np.sin(kt), axis=1)
    return np.where(here >= np.sum(a[:, 1:], axis=1), theta, 0.0)


def _stiefel_sweep(problem: Problem, full: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """One Givens sweep over the planes that move the isotropic frame."""
    b, m, _ = full.shape
    planes = [(p, q) for p in range(4) for q in range(p + 1, m) if (p, q) not in ((0, 1), (2, 3))]
    cs, sn = np.cos(_TRIG_NODES), np.sin(_TRIG_NODES)
    for p, q in planes:
        cp, cq = full[:, :, p], full[:, :, q]
        frames = np.repeat(full[:, None, :, :4], 9, axis=1)
        newp = cs[None, :, None] * cp[:, None, :] + sn[None, :, None] * cq[:, None, :]
        newq = -sn[None, :, None] * cp[:, None, :] + cs[None, :, None] * cq[:, None, :]
        frames[:, :, :, p] = newp
        if q < 4:
            frames[:, :, :, q] = newq
        vals = problem.raw(frames.reshape(b, 9, 4 * m))
        th = _trig_argmax(vals, sign)
        c, s = np.cos(th)[:, None], np.sin(th)[:, None]
        full[:, :, p], full[:, :, q] = c * cp + s * cq, -s * cp + c * cq
    return full


def _sign_rows(sign, b: int) -> np.ndarray:
    sign = np.broadcast_to(np.asarray(sign, dtype=float), (b,)).copy()
    if not np.all(np.abs(sign) == 1.0):
        raise ValueError("sign must be +1 or -1")
    return sign


def block_refine(problem: Problem, x0: np.ndarray, sign,
                 max_sweeps: int = MAX_SWEEPS, rtol: float = 1e-11, window: int = 3):
    """Monotone block-coordinate ascent of ``sign * value``.

    ``sign`` is +1 (maximize), -1 (minimize) or one of those per start row.
    Returns ``(x, values, sweeps)``.
    """
    x = problem.project(np.array(np.atleast_2d(x0), dtype=float, copy=True))
    b = x.shape[0]
    sign = _sign_rows(sign, b)
    if problem.kind == "stiefel":
        m = problem.dim // 4
        fr = x.reshape(b, m, 4)
        full = _orthonormal_columns(np.concatenate(
            [fr, np.broadcast_to(np.eye(m), (b, m, m))], axis=2))[:, :, :m]
        # keep the original first four columns exactly (QR may flip signs)
        full[:, :, :4] = fr
        state = full
        cur = lambda st: st[:, :, :4].reshape(b, 4 * m)
        sweep = _stiefel_sweep
    else:
        state = x
        cur = lambda st: st
        sweep = _block_sweep
    groups = [sign == s for s in (-1.0, 1.0) if np.any(sign == s)]

    def bests(st):
        f = sign * problem.raw(cur(st))
        return np.array([f[g].max() for g in groups])

    hist = [bests(state)]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        state = sweep(problem, state, sign)
        hist.append(np.maximum(hist[-1], bests(state)))
        # stop once the best start of every direction has stalled over a short window
        if len(hist) > window and np.all(
                hist[-1] - hist[-1 - window] <= rtol * np.maximum(1.0, np.abs(hist[-1]))):
            break
    xs = problem.project(cur(state))
    return xs, problem.raw(xs), sweeps


def gradient_refine(problem: Problem, x0: np.ndarray, sign,
                    max_iter: int = 200, gtol: float = 1e-8,
                    h: float = 1e-6, step0: float = 0.25):
    """Projected-gradient ascent of ``sign * value`` with central differences and step halving."""
    x = problem.project(np.array(np.atleast_2d(x0), dtype=float, copy=True))
    m, dim = x.shape
    sign = _sign_rows(sign, m)
    f = sign * problem.value(x)
    step = np.full(m, step0)
    active = np.ones(m, dtype=bool)
    eye = np.eye(dim) * h
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa, sa = x[idx], sign[idx]
        pts = np.concatenate([xa[:, None, :] + eye, xa[:, None, :] - eye], axis=1)
        vals = sa[:, None] * problem.value(pts)
        grad = (vals[:, :dim] - vals[:, dim:]) / (2 * h)
        gnorm = np.linalg.norm(grad, axis=1)
        done = gnorm < gtol
        trial = problem.project(xa + step[idx, None] * grad / np.maximum(gnorm, 1e-300)[:, None])
        ft = sa * problem.value(trial)
        move = (ft > f[idx]) & ~done
        x[idx[move]] = trial[move]
        f[idx[move]] = ft[move]
        step[idx[move]] = np.minimum(step[idx[move]] * 1.5, 1.0)
        stay = ~(ft > f[idx]) & ~done
        step[idx[stay]] *= 0.5
        active[idx[done]] = False
        active[step < 1e-13] = False
    return x, sign * f, it


REFINERS = {"block": block_refine, "gradient": gradient_refine}


def sample_domain(problem: Problem, rng: np.random.Generator, samples: int, chunk: int = 4096):
    """Uniform samples of the domain and their values."""
    if samples < 1:
        raise ValueError("samples must be positive")
    xs, vs = [], []
    left = samples
    while left > 0:
        m = min(chunk, left)
        x = problem.sample(rng, m)
        xs.append(x)
        vs.append(problem.raw(x))
        left -= m
    return np.concatenate(xs), np.concatenate(vs)


def search_extrema(problem: Problem, rng: np.random.Generator, samples: int, restarts: int,
                   extra_starts=None, method: str = "block", directions=(-1.0, 1.0),
                   sampled=None):
    """Return ``{sign: (value, x)}`` with the smallest (-1) and largest (+1) values found.

    The best ``restarts`` samples of each requested direction, together with
    ``extra_starts`` (flat parameter rows), are refined in a single batch.
    ``sampled`` may pass a precomputed ``(X, V)`` from :func:`sample_domain`.
    """
    if restarts < 1:
        raise ValueError("restarts must be positive")
    X, V = sampled if sampled is not None else sample_domain(problem, rng, samples)
    extra = None
    if extra_starts is not None and len(extra_starts):
        extra = problem.project(np.atleast_2d(np.asarray(extra_starts, dtype=float)))
    starts, signs = [], []
    for sign in directions:
        k = min(restarts, len(V))
        order = np.argpartition(-sign * V, k - 1)[:k]
        starts.append(X[order])
        signs.append(np.full(k, sign))
        if extra is not None:
            starts.append(extra)
            signs.append(np.full(len(extra), sign))
    signs = np.concatenate(signs)
    xr, fr, _ = REFINERS[method](problem, np.concatenate(starts), signs)
    out = {}
    for sign in directions:
        rows = np.nonzero(signs == sign)[0]
        j = rows[int(np.argmax(sign * fr[rows]))]
        # refinement is monotone for the block method; keep the sample if it was better anyway
        j0 = int(np.argmax(sign * V))
        best = xr[j] if sign * fr[j] >= sign * V[j0] else X[j0]
        out[sign] = (float(problem.value(best[None])[0]), best)
    return out
