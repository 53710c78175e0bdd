"""Sign verdicts for every curvature notion and the implication audit.

Nakano, dual-Nakano and the real curvature operator are unrestricted
quadratic forms, so their verdicts come from a full eigen-decomposition and
are certified.  The remaining notions restrict a form to a non-convex set and
are decided by multistart search; a sign violation found that way is exact
(its witness is re-evaluated through :mod:`curvlab.positivity.forms`), but
the absence of one is only evidence.

Sign semantics at tolerance ``tol`` for extremal values ``lo <= hi``::

    positive     lo >  tol
    negative     hi < -tol
    nonnegative  lo >= -tol   (both_semi when also hi <= tol)
    nonpositive  hi <=  tol
    indefinite   otherwise
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..tensor_core import CurvatureTensor, TensorError
from . import forms
from .search import (SAMPLED_NOTIONS, block_refine, evaluate_witness, make_problem,
                     sample_domain, search_extrema)

DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 10_000
DEFAULT_RESTARTS = 20
WITNESS_RTOL = 1e-10

CERTIFIED_NOTIONS = ("nakano", "dual_nakano", "curvature_operator")
NOTIONS = ("griffiths", "nakano", "dual_nakano", "siu_strong", "complex_sectional",
           "riemannian_sectional", "bisectional", "isotropic", "curvature_operator")
SIGNS = ("positive", "nonnegative", "nonpositive", "negative", "indefinite", "undetermined")

# label -> (stronger, weaker): "stronger nonpositive implies weaker nonpositive"
CHAIN = (
    ("2=>3", "dual_nakano", "curvature_operator"),
    ("3=>5", "curvature_operator", "complex_sectional"),
    ("5=>6", "complex_sectional", "riemannian_sectional"),
    ("5=>8", "complex_sectional", "isotropic"),
    ("6=>7", "riemannian_sectional", "bisectional"),
    ("4<=>5", "siu_strong", "complex_sectional"),
    ("4<=>5", "complex_sectional", "siu_strong"),
)
CHAIN_LABELS = ("2=>3", "3=>5", "5=>6", "5=>8", "6=>7", "4<=>5")


def sign_from_extrema(lo: float, hi: float, tol: float) -> tuple[str, bool]:
    """Return ``(sign, both_semi)`` for extremal values ``lo <= hi``."""
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return "undetermined", False
    if lo > tol:
        return "positive", False
    if hi < -tol:
        return "negative", False
    if lo >= -tol:
        return "nonnegative", bool(hi <= tol)
    if hi <= tol:
        return "nonpositive", False
    return "indefinite", False


@dataclass(frozen=True)
class NotionVerdict:
    """Verdict for one notion.

    ``extremal_value``/``witness`` are the extreme that decides the sign: the
    minimum for positive/nonnegative, the maximum for negative/nonpositive
    and indefinite.  Both extremes are kept in ``min_*``/``max_*``.
    """

    notion: str
    sign: str
    certified: bool
    extremal_value: float
    witness: dict
    min_value: float = float("nan")
    max_value: float = float("nan")
    min_witness: dict = field(default_factory=dict)
    max_witness: dict = field(default_factory=dict)
    both_semi: bool = False
    kernel_dim: int | None = None
    refined: tuple = ()
    note: str = ""

    @property
    def nonpositive(self) -> bool:
        return self.sign in ("nonpositive", "negative") or self.both_semi

    @property
    def nonnegative(self) -> bool:
        return self.sign in ("nonnegative", "positive")

    def to_dict(self) -> dict:
        return {
            "notion": self.notion, "sign": self.sign, "certified": self.certified,
            "extremal_value": self.extremal_value, "min_value": self.min_value,
            "max_value": self.max_value, "both_semi": self.both_semi,
            "kernel_dim": self.kernel_dim, "refined": list(self.refined), "note": self.note,
            "witness": _witness_json(self.witness),
            "min_witness": _witness_json(self.min_witness),
            "max_witness": _witness_json(self.max_witness),
        }


def _witness_json(w: dict) -> dict:
    out = {}
    for k, v in w.items():
        v = np.asarray(v)
        if np.iscomplexobj(v):
            out[k] = {"re": v.real.tolist(), "im": v.imag.tolist()}
        else:
            out[k] = v.tolist()
    return out


def _make_verdict(notion, lo, lo_w, hi, hi_w, tol, certified, **extra) -> NotionVerdict:
    sign, both = sign_from_extrema(lo, hi, tol)
    use_lo = sign in ("positive", "nonnegative")
    return NotionVerdict(
        notion=notion, sign=sign, certified=certified,
        extremal_value=float(lo if use_lo else hi), witness=lo_w if use_lo else hi_w,
        min_value=float(lo), max_value=float(hi), min_witness=lo_w, max_witness=hi_w,
        both_semi=both, **extra)


def _undetermined(notion: str, certified: bool, note: str) -> NotionVerdict:
    nan = float("nan")
    return NotionVerdict(notion, "undetermined", certified, nan, {}, nan, nan, note=note)


# ----------------------------------------------------------------- certified

def certified_matrix(notion: str, R: CurvatureTensor) -> np.ndarray:
    if notion == "nakano":
        return forms.nakano_form(R)
    if notion == "dual_nakano":
        return forms.dual_nakano_form(R)
    if notion == "curvature_operator":
        return forms.real_curvature_operator(R)
    raise ValueError(f"{notion!r} is not decided by eigen-decomposition")


def _eigen_witness(notion: str, R: CurvatureTensor, vec: np.ndarray) -> dict:
    if notion == "curvature_operator":
        return {"bivector": np.asarray(vec, dtype=float)}
    # the forms read u^T M conj(u), so the eigenvector enters conjugated
    return {"u": np.conj(vec).reshape(R.n, R.r)}


def evaluate_certified_witness(notion: str, R: CurvatureTensor, w: dict) -> float:
    """Re-evaluate an eigen witness through the form functions (unit normalization)."""
    if notion == "curvature_operator":
        v = np.asarray(w["bivector"], dtype=float)
        return float(forms.operator_value_from_B(R, v) / (forms.BASIS_NORM_SQ * (v @ v)))
    u = np.asarray(w["u"], dtype=complex)
    nrm = np.vdot(u, u).real
    if notion == "nakano":
        return forms.nakano_value(R, u) / nrm
    if notion == "dual_nakano":
        return forms.dual_nakano_value(R, u) / nrm
    raise ValueError(f"{notion!r} is not decided by eigen-decomposition")


def classify_eigen(notion: str, R: CurvatureTensor, tol: float = DEFAULT_TOL,
                   matrix: np.ndarray | None = None) -> NotionVerdict:
    """Certified verdict from the full spectrum of the notion's Hermitian matrix.

    ``kernel_dim`` counts eigenvalues in ``[-tol, tol]``.  A failing or
    non-finite eigen-decomposition yields an ``undetermined`` verdict.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    M = certified_matrix(notion, R) if matrix is None else np.asarray(matrix)
    try:
        if not np.all(np.isfinite(M)):
            raise np.linalg.LinAlgError("non-finite matrix entries")
        lam, vec = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        return _undetermined(notion, True, f"eigen-decomposition failed: {exc}")
    if not np.all(np.isfinite(lam)):
        return _undetermined(notion, True, "eigen-decomposition returned non-finite values")
    kernel = int(np.sum(np.abs(lam) <= tol))
    return _make_verdict(notion, lam[0], _eigen_witness(notion, R, vec[:, 0]),
                         lam[-1], _eigen_witness(notion, R, vec[:, -1]), tol, True,
                         kernel_dim=kernel, refined=("min", "max"))


# ------------------------------------------------------------------- sampled

def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def classify_sampled(notion: str, R: CurvatureTensor, samples: int = DEFAULT_SAMPLES,
                     restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                     seed=None, extra_starts=None, refine: str = "decisive",
                     method: str = "block") -> NotionVerdict:
    """Search-based verdict for a sampled notion; ``certified`` is always False.

    ``refine="decisive"`` refines only the directions whose extreme can still
    change the verdict (a direction whose sampled extreme already lies beyond
    the tolerance band on its side is settled by that sample); ``"both"``
    refines the minimum and the maximum regardless.
    """
    if samples < 1 or restarts < 1:
        raise ValueError("samples and restarts must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if refine not in ("decisive", "both"):
        raise ValueError(f"unknown refine mode {refine!r}")
    if notion == "isotropic" and R.n < 2:
        return _undetermined(notion, False, "no isotropic 2-planes in real dimension < 4")
    rng = _as_rng(seed)
    problem = make_problem(notion, R)
    X, V = sample_domain(problem, rng, samples)
    if extra_starts is not None and len(extra_starts):
        E = problem.project(np.atleast_2d(np.asarray(extra_starts, dtype=float)))
        ev = problem.raw(E)
        ok = np.isfinite(ev)
        X, V = np.concatenate([X, E[ok]]), np.concatenate([V, ev[ok]])
    if refine == "both":
        directions = (-1.0, 1.0)
    else:
        directions = tuple(d for d in (-1.0, 1.0)
                           if (d > 0 and np.max(V) <= tol) or (d < 0 and np.min(V) >= -tol))
        if notion == "riemannian_sectional" and np.max(V) < -tol:
            directions = (-1.0, 1.0)          # both ends feed the pinching ratio
    found = {}
    if directions:
        found = search_extrema(problem, rng, samples, restarts, directions=directions,
                               sampled=(X, V), method=method)
    ends = {}
    for d in (-1.0, 1.0):
        x = found[d][1] if d in found else X[int(np.argmax(d * V))]
        w = problem.witness(x)
        ends[d] = (evaluate_witness(notion, R, w), w)
    refined = tuple(name for d, name in ((-1.0, "min"), (1.0, "max")) if d in directions)
    (lo, lo_w), (hi, hi_w) = ends[-1.0], ends[1.0]
    return _make_verdict(notion, lo, lo_w, hi, hi_w, tol, False, refined=refined)


def isotropic_extremum(R: CurvatureTensor, samples: int = DEFAULT_SAMPLES,
                       restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                       seed=None, refine: str = "both") -> NotionVerdict:
    """Extremes of isotropic curvature over orthonormal real 4-frames."""
    if not R.kahler:
        raise TensorError("isotropic curvature needs a Kähler tensor")
    if R.n < 2:
        raise ValueError("isotropic curvature needs complex dimension >= 2")
    return classify_sampled("isotropic", R, samples, restarts, tol, seed, refine=refine)


# ------------------------------------------------------- witness transport

def _flat_complex(*vecs) -> np.ndarray:
    parts = []
    for v in vecs:
        v = np.asarray(v, dtype=complex)
        parts += [v.real, v.imag]
    return np.concatenate(parts)


def transport_witness(src: str, dst: str, w: dict, n: int) -> list[np.ndarray]:
    """Flat search parameters for ``dst`` whose values carry the sign of ``w``'s value.

    Only the directions used by the implication chain are supported; the
    returned candidates are exact images, so a positive (negative) source
    value yields a candidate of the same sign (for bisectional sources, at
    least one of the two candidates).
    """
    if src == "riemannian_sectional" and dst == "complex_sectional":
        return [_flat_complex(forms.complexify_real(w["X"]), forms.complexify_real(w["Y"]))]
    if src == "isotropic" and dst == "complex_sectional":
        v, ww = forms.isotropic_pair(w["frame"])
        return [_flat_complex(forms.complexify_complex(v), forms.complexify_complex(ww.conj()))]
    if src == "siu_strong" and dst == "complex_sectional":
        Z, W = forms.sectional_from_siu(w["A"], w["B"], w["C"], w["D"])
        return [_flat_complex(Z, W)]
    if src == "complex_sectional" and dst == "siu_strong":
        A, B, C, D = forms.siu_from_sectional(w["Z"], w["W"], n)
        return [_flat_complex(np.concatenate([A, D]), np.concatenate([B, C]))]
    if src == "bisectional" and dst == "riemannian_sectional":
        u, v = np.asarray(w["u"], complex), np.asarray(w["v"], complex)
        X = np.concatenate([u.real, u.imag])
        out = []
        for y in (v, 1j * v):
            Y = np.concatenate([y.real, y.imag])
            Y = Y - (X @ Y) / (X @ X) * X
            if np.linalg.norm(Y) > 1e-12 * np.linalg.norm(X):
                out.append(np.concatenate([X, Y]))
        return out
    raise ValueError(f"no witness transport from {src} to {dst}")


_TRANSPORTS = (("bisectional", "riemannian_sectional"),
               ("riemannian_sectional", "complex_sectional"),
               ("isotropic", "complex_sectional"),
               ("siu_strong", "complex_sectional"),
               ("complex_sectional", "siu_strong"))


def _improve_with(R, verdict: NotionVerdict, cands, tol) -> NotionVerdict:
    """Fold transported candidates into a sampled verdict, refining any that improve it."""
    if verdict.sign == "undetermined" or not cands:
        return verdict
    problem = make_problem(verdict.notion, R)
    x = problem.project(np.atleast_2d(np.asarray(cands, dtype=float)))
    vals = problem.raw(x)
    ok = np.isfinite(vals)
    if not np.any(ok):
        return verdict
    x, vals = x[ok], vals[ok]
    lo, lo_w, hi, hi_w = verdict.min_value, verdict.min_witness, verdict.max_value, verdict.max_witness
    changed = False
    for d in (-1.0, 1.0):
        j = int(np.argmax(d * vals))
        cur = hi if d > 0 else lo
        # only an extreme still inside the tolerance band can change the verdict
        if d * cur > tol or d * vals[j] <= d * cur:
            continue
        xr, fr, _ = block_refine(problem, x[j:j + 1], d)
        w = problem.witness(xr[0])
        val = evaluate_witness(verdict.notion, R, w)
        if d * val > d * cur:
            changed = True
            if d > 0:
                hi, hi_w = val, w
            else:
                lo, lo_w = val, w
    if not changed:
        return verdict
    note = (verdict.note + "; " if verdict.note else "") + "improved by transported witness"
    return _make_verdict(verdict.notion, lo, lo_w, hi, hi_w, tol, False,
                         refined=verdict.refined, note=note)


def reconcile(R: CurvatureTensor, verdicts: dict, tol: float, passes: int = 3) -> dict:
    """Push witnesses along the implication chain until no verdict improves."""
    verdicts = dict(verdicts)
    for _ in range(passes):
        changed = False
        for src, dst in _TRANSPORTS:
            vs, vd = verdicts.get(src), verdicts.get(dst)
            if vs is None or vd is None or "undetermined" in (vs.sign, vd.sign):
                continue
            cands = []
            for w in (vs.min_witness, vs.max_witness):
                if w:
                    cands += transport_witness(src, dst, w, R.n)
            new = _improve_with(R, vd, cands, tol)
            if new is not vd:
                verdicts[dst] = new
                changed = True
        if not changed:
            break
    return verdicts


# --------------------------------------------------------------------- audit

@dataclass(frozen=True)
class ClassificationReport:
    verdicts: dict
    chain_violations: tuple
    tol: float
    pinching: dict = field(default_factory=dict)
    n: int = 0
    r: int = 0

    def __getitem__(self, notion: str) -> NotionVerdict:
        return self.verdicts[notion]

    def to_dict(self) -> dict:
        return {
            "n": self.n, "r": self.r, "tol": self.tol,
            "verdicts": [self.verdicts[k].to_dict() for k in NOTIONS if k in self.verdicts],
            "chain_violations": list(self.chain_violations),
            "pinching": self.pinching,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_text(self) -> str:
        lines = [f"n={self.n} r={self.r} tol={self.tol:g}"]
        for k in NOTIONS:
            if k not in self.verdicts:
                continue
            v = self.verdicts[k]
            tag = "certified" if v.certified else "sampled"
            extra = " both_semi" if v.both_semi else ""
            if v.kernel_dim is not None:
                extra += f" kernel={v.kernel_dim}"
            lines.append(f"{k:22s} {v.sign:12s} {tag:9s} min={v.min_value:+.6e} "
                         f"max={v.max_value:+.6e}{extra}")
        if self.pinching:
            lines.append("pinching: " + " ".join(f"{k}={v}" for k, v in self.pinching.items()))
        lines.append("chain_violations: " + (", ".join(self.chain_violations) or "none"))
        return "\n".join(lines) + "\n"


def chain_violations(verdicts: dict, tol: float) -> list[str]:
    """Implication labels contradicted by the verdicts, in both sign orientations.

    ``A => B`` is contradicted when A is nonpositive within ``tol`` while B has
    a witness above ``tol`` (negative chain), or A is nonnegative within
    ``tol`` while B has a witness below ``-tol`` (positive chain).
    """
    out = []
    for label, a, b in CHAIN:
        va, vb = verdicts.get(a), verdicts.get(b)
        if va is None or vb is None or "undetermined" in (va.sign, vb.sign):
            continue
        neg = va.max_value <= tol and vb.max_value > tol
        pos = va.min_value >= -tol and vb.min_value < -tol
        if (neg or pos) and label not in out:
            out.append(label)
    return out


def pinching_predicate(v: NotionVerdict, tol: float = DEFAULT_TOL) -> dict:
    """Reporting-only ratio test for weakly 1/4-pinched negative sectional curvature."""
    if v.sign == "undetermined":
        return {}
    lo, hi = v.min_value, v.max_value
    negative = bool(hi < -tol)
    ratio = float(hi / lo) if negative else float("nan")
    return {"negative": negative, "ratio": ratio,
            "weakly_quarter_pinched": bool(negative and ratio >= 0.25 - tol)}


def substreams(seed, names=NOTIONS) -> dict:
    """One independent generator per notion, derived from a master seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return {k: np.random.default_rng(s) for k, s in zip(names, ss.spawn(len(names)))}


def implication_audit(R: CurvatureTensor, samples: int = DEFAULT_SAMPLES,
                      restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                      seed=None, overrides: dict | None = None,
                      transport: bool = True) -> ClassificationReport:
    """Classify every notion and list the chain implications the verdicts contradict.

    ``overrides`` replaces computed verdicts before the chain check; it exists
    to inject defects when testing the audit itself.  For a Kähler tensor the
    Griffiths and bisectional objectives coincide, so the bisectional search
    result is reused for Griffiths.
    """
    if not R.kahler:
        raise TensorError("the implication audit needs a Kähler tensor")
    rngs = substreams(seed)
    verdicts = {k: classify_eigen(k, R, tol) for k in CERTIFIED_NOTIONS}
    for k in ("bisectional", "riemannian_sectional", "complex_sectional", "siu_strong", "isotropic"):
        verdicts[k] = classify_sampled(k, R, samples, restarts, tol, rngs[k])
    if transport:
        verdicts = reconcile(R, verdicts, tol)
    b = verdicts["bisectional"]
    verdicts["griffiths"] = replace(b, notion="griffiths")
    if overrides:
        verdicts.update(overrides)
    return ClassificationReport(
        verdicts=verdicts, chain_violations=tuple(chain_violations(verdicts, tol)), tol=tol,
        pinching=pinching_predicate(verdicts["riemannian_sectional"], tol), n=R.n, r=R.r)


def classify_all(R: CurvatureTensor, samples: int = DEFAULT_SAMPLES,
                 restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                 seed=None) -> ClassificationReport:
    """Full report; non-Kähler tensors get the bundle notions only (no chain)."""
    if R.kahler:
        return implication_audit(R, samples, restarts, tol, seed)
    rngs = substreams(seed)
    verdicts = {k: classify_eigen(k, R, tol) for k in ("nakano", "dual_nakano")}
    verdicts["griffiths"] = classify_sampled("griffiths", R, samples, restarts, tol, rngs["griffiths"])
    return ClassificationReport(verdicts=verdicts, chain_violations=(), tol=tol, n=R.n, r=R.r)
