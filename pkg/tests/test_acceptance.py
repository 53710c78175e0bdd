"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from curvlab.positivity import forms
from curvlab.positivity.classify import classify_eigen, implication_audit
from curvlab.tensor_core import (SIGN_CLASSES, curvature_from_jet, model_complex_ball,
                                 model_fubini_study, random_adapted_jet, random_kahler_tensor,
                                 subbundle_curvature)
from curvlab.wp import run_wp

pytestmark = pytest.mark.acceptance


def verdict(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_criterion_1_model_classification():
    t0 = time.perf_counter()
    problems = []
    for n in (1, 2, 3):
        kernel = n * (n - 1) // 2
        for R, s in ((model_fubini_study(n), 1), (model_complex_ball(n), -1)):
            dn = classify_eigen("dual_nakano", R, 1e-9)
            nk = classify_eigen("nakano", R, 1e-9)
            strict = dn.min_value > 1e-9 if s > 0 else dn.max_value < -1e-9
            semi = nk.nonnegative if s > 0 else nk.nonpositive
            if not (dn.certified and strict and semi and nk.kernel_dim == kernel):
                problems.append((n, s, dn.sign, nk.sign, nk.kernel_dim))
    dt = time.perf_counter() - t0
    verdict(1, not problems and dt < 1.0, f"6 models, kernels n(n-1)/2, {dt:.3f} s {problems or ''}")


def test_criterion_2_siu_complex_sectional_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for k, ss in enumerate(np.random.SeedSequence(2).spawn(1000)):
        rng = np.random.default_rng(ss)
        n = 1 + k % 3
        R = random_kahler_tensor(rng, n)
        A, B, C, D = (crandn(rng, n) for _ in range(4))
        a = forms.siu_form_value(R, A, B, C, D)
        b = forms.complex_sectional_value(R, *forms.sectional_from_siu(A, B, C, D))
        Z, W = crandn(rng, 2 * n), crandn(rng, 2 * n)
        c = forms.complex_sectional_value(R, Z, W)
        d = forms.siu_form_value(R, *forms.siu_from_sectional(Z, W, n))
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)), abs(c - d) / max(abs(c), abs(d)))
    dt = time.perf_counter() - t0
    verdict(2, worst < 1e-12 and dt < 10, f"max relative residual {worst:.2e}, {dt:.2f} s")


def test_criterion_3_curvature_operator_bridge():
    t0 = time.perf_counter()
    lam_max = -np.inf
    route = 0.0
    pointwise = 0.0
    for k, ss in enumerate(np.random.SeedSequence(3).spawn(1000)):
        rng = np.random.default_rng(ss)
        n = 2 + k % 2
        R = random_kahler_tensor(rng, n, "semi-dual-nakano-negative")
        Q = forms.real_curvature_operator(R)
        lam = np.linalg.eigvalsh(Q)
        lam_max = max(lam_max, lam[-1])
        v = rng.normal(size=len(Q))
        a, b = forms.operator_value_from_matrix(R, v), forms.operator_value_from_B(R, v)
        # agreement on the scale of the form, |Q| |v|^2; values that cancel to
        # near zero make the pointwise ratio meaningless, so it is only shown
        route = max(route, abs(a - b) / (np.max(np.abs(lam)) * (v @ v)))
        pointwise = max(pointwise, abs(a - b) / max(abs(a), abs(b)))
    dt = time.perf_counter() - t0
    verdict(3, lam_max <= 1e-9 and route < 1e-12 and dt < 60,
            f"max operator eigenvalue {lam_max:.2e}, route residual {route:.2e} "
            f"(pointwise {pointwise:.1e}), {dt:.1f} s")


def test_criterion_4_implication_chain_audit():
    t0 = time.perf_counter()
    bad = []
    for c, sign_class in enumerate(SIGN_CLASSES):
        for k, ss in enumerate(np.random.SeedSequence([4, c]).spawn(1000)):
            gen, search = ss.spawn(2)
            R = random_kahler_tensor(np.random.default_rng(gen), 2 + k % 2, sign_class)
            rep = implication_audit(R, 10_000, 20, 1e-9, search)
            if rep.chain_violations:
                bad.append((sign_class, k, rep.chain_violations))
    dt = time.perf_counter() - t0
    verdict(4, not bad and dt < 600,
            f"{1000 * len(SIGN_CLASSES)} tensors over {len(SIGN_CLASSES)} sign classes, "
            f"{len(bad)} with violations, {dt:.0f} s {bad[:3] or ''}")


def test_criterion_5_wp_pipeline(wp_run3):
    t0 = time.perf_counter()
    m = wp_run3.manifest
    cot = wp_run3.cotangent
    nak = classify_eigen("nakano", cot, wp_run3.mesh_tol)
    dn_min = np.linalg.eigvalsh(forms.dual_nakano_form(cot))[0]
    checks = {
        "area": abs(m["liouville"]["area_relative_error"]) < 5e-3,
        "liouville": m["liouville"]["residual"] < 1e-8,
        "kernel_symmetric": m["green"]["kernel"]["asymmetry"] < 1e-10,
        "kernel_positive": m["green"]["kernel"]["min_entry"] > 0,
        "hodge_wp": m["basis"]["hodge_wp_residual"] < 1e-10,
        "nakano_positive": nak.sign == "positive" and nak.certified,
        "dual_nakano": dn_min >= -1e-3 * cot.max_norm,
        "symmetrization": (len(m["symmetrization"]["trials"]) == 20
                           and m["symmetrization"]["max_residual"] < 1e-6),
    }
    signs = {3: dict(wp_run3.verdicts)}
    for level in (2, 4):
        run = run_wp(level=level, seed=0, dense_kernel=False, curvature_check=False)
        signs[level] = dict(run.verdicts)
    checks["stable_verdicts"] = signs[2] == signs[3] == signs[4]
    dt = time.perf_counter() - t0 + sum(m["timings_s"].values())
    failed = [k for k, ok in checks.items() if not ok]
    verdict(5, not failed and dt < 900,
            f"level 3: area err {m['liouville']['area_relative_error']:.1e}, "
            f"kernel asym {m['green']['kernel']['asymmetry']:.1e}, "
            f"DN min {dn_min:+.2e}, identity {m['symmetrization']['max_residual']:.1e}; "
            f"verdicts equal at 2/3/4: {checks['stable_verdicts']}; {dt:.0f} s {failed or ''}")


def test_criterion_6_subbundle_monotonicity():
    t0 = time.perf_counter()
    not_semi = 0
    corr_min = np.inf
    for k, ss in enumerate(np.random.SeedSequence(6).spawn(1000)):
        rng = np.random.default_rng(ss)
        n, r = 1 + k % 3, 2 + k % 3
        s = int(rng.integers(1, r))
        jet = random_adapted_jet(rng, n, r, "semi-nakano-negative")
        R_S, corr = subbundle_curvature(curvature_from_jet(jet), jet, s)
        v = classify_eigen("nakano", R_S, 1e-9)
        not_semi += not (v.certified and v.nonpositive)
        corr_min = min(corr_min, np.linalg.eigvalsh(forms.nakano_form(corr))[0])
    dt = time.perf_counter() - t0
    verdict(6, not_semi == 0 and corr_min >= -1e-12 and dt < 30,
            f"{not_semi} subbundles not semi-Nakano-negative, correction min {corr_min:+.1e}, {dt:.2f} s")


def test_criterion_7_tangent_cotangent_duality(wp_run3):
    res = wp_run3.manifest["tensors"]["duality_residual"]
    tan = wp_run3.tangent
    searched = wp_run3.tangent_report.verdicts["bisectional"].max_value
    rng = np.random.default_rng(7)
    u, v = crandn(rng, 10_000, 3), crandn(rng, 10_000, 3)
    sampled = max(forms.bisectional_value(tan, a, b) for a, b in zip(u, v))
    verdict(7, res < 1e-4 and searched < 0 and sampled < 0,
            f"duality residual {res:.1e}, bisectional max searched {searched:+.3e}, "
            f"sampled {sampled:+.3e}")
