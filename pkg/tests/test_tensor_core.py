import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from curvlab.positivity.forms import dual_nakano_form, nakano_form
from curvlab.tensor_core import (CurvatureTensor, HermitianMetricJet, TensorError, change_frame,
                                 curvature_from_jet, dual_tensor, hermitian_conjugate,
                                 kahler_symmetrize, model_complex_ball, model_fubini_study,
                                 orthonormalizing_frame, random_adapted_jet, random_kahler_tensor,
                                 subbundle_curvature, validate, zero_tensor)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 4)


def eig(M):
    return np.linalg.eigvalsh(M)


# ------------------------------------------------------------------ models

def test_fubini_study_n1_value():
    assert model_fubini_study(1)[0, 0, 0, 0] == 2


def test_fubini_study_n2_entries():
    R = model_fubini_study(2)
    # delta formula: R_{11 22} = 1, R_{12 21} = 1, R_{12 12} = 0 (1-based)
    assert R[0, 0, 1, 1] == 1
    assert R[0, 1, 1, 0] == 1
    assert R[0, 1, 0, 1] == 0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_models_validate(n):
    assert validate(model_fubini_study(n)) == []
    assert validate(model_complex_ball(n)) == []
    assert model_fubini_study(n).kahler


def test_ball_is_negated_fubini_study():
    assert model_complex_ball(1)[0, 0, 0, 0] == -2
    for n in (1, 2, 4):
        np.testing.assert_array_equal(model_complex_ball(n).entries,
                                      model_fubini_study(n).scale(-1).entries)


def test_model_rejects_bad_dimension():
    with pytest.raises(TensorError):
        model_fubini_study(0)


def test_kahler_tensor_needs_square_shape():
    with pytest.raises(TensorError):
        CurvatureTensor(np.zeros((2, 2, 3, 3)), kahler=True)
    with pytest.raises(TensorError):
        CurvatureTensor(np.zeros((2, 3, 2, 2)))


# -------------------------------------------------------------------- jets

def test_flat_jet_gives_zero_tensor():
    jet = HermitianMetricJet(np.eye(2), np.zeros((3, 2, 2)), np.zeros((3, 3, 2, 2)))
    R = curvature_from_jet(jet)
    assert (R.n, R.r) == (3, 2)
    assert np.all(R.entries == 0)


def test_fubini_study_jet_at_origin():
    # finite differences of log(1+|z|^2) in 60-digit arithmetic
    h, dh, ddh = oracles.fubini_study_jet([0.0])
    np.testing.assert_allclose(h, [[1.0]], atol=1e-15)
    np.testing.assert_allclose(ddh[0, 0], [[-2.0]], atol=1e-15)
    R = curvature_from_jet(HermitianMetricJet(h, dh, ddh))
    assert R[0, 0, 0, 0] == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("z0", [[0.3 + 0.1j, -0.2 + 0.4j], [0.5j, 0.1, -0.3 - 0.2j]])
def test_jet_curvature_matches_constant_curvature_off_origin(z0):
    h, dh, ddh = oracles.fubini_study_jet(z0)
    R = curvature_from_jet(HermitianMetricJet(h, dh, ddh))
    np.testing.assert_allclose(R.entries, oracles.constant_curvature_tensor(h, 1.0), atol=1e-12)
    h, dh, ddh = oracles.ball_jet(z0)
    R = curvature_from_jet(HermitianMetricJet(h, dh, ddh))
    np.testing.assert_allclose(R.entries, oracles.constant_curvature_tensor(h, -1.0), atol=1e-12)


def test_jet_rejects_indefinite_metric():
    with pytest.raises(TensorError):
        HermitianMetricJet(np.diag([1.0, -1.0]), np.zeros((1, 2, 2)), np.zeros((1, 1, 2, 2)))


def test_jet_rejects_non_hermitian_second_derivative():
    ddh = np.zeros((1, 1, 2, 2), dtype=complex)
    ddh[0, 0, 0, 1] = 1.0
    with pytest.raises(TensorError):
        HermitianMetricJet(np.eye(2), np.zeros((1, 2, 2)), ddh)


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_first_derivative_only_jet_is_connection_term(seed, n, r):
    rng = np.random.default_rng(seed)
    dh = rng.normal(size=(n, r, r)) + 1j * rng.normal(size=(n, r, r))
    R = curvature_from_jet(HermitianMetricJet(np.eye(r), dh, np.zeros((n, n, r, r))))
    conn = np.einsum("iad,jbd->ijab", dh, dh.conj())
    np.testing.assert_allclose(R.entries, conn, atol=1e-12)
    assert eig(nakano_form(R))[0] >= -1e-10 * max(1.0, R.max_norm)


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_jet_curvature_is_hermitian(seed, n, r):
    R = curvature_from_jet(random_adapted_jet(seed, n, r))
    assert R.hermitian_residual() == 0.0


# ------------------------------------------------------------------ random

@given(seeds, dims, st.sampled_from(["unconstrained", "semi-dual-nakano-negative",
                                      "semi-nakano-negative"]))
def test_random_tensor_is_kahler_and_deterministic(seed, n, cls):
    R = random_kahler_tensor(seed, n, cls)
    assert validate(R) == []
    assert R.hermitian_residual() == 0.0
    np.testing.assert_array_equal(R.entries, random_kahler_tensor(seed, n, cls).entries)


def test_random_seed_1_examples():
    assert validate(random_kahler_tensor(1, 2, "unconstrained")) == []
    R = random_kahler_tensor(1, 2, "semi-dual-nakano-negative")
    assert eig(dual_nakano_form(R))[-1] <= 1e-12 * R.max_norm


@given(seeds, dims)
def test_semi_dual_nakano_negative_class(seed, n):
    R = random_kahler_tensor(seed, n, "semi-dual-nakano-negative")
    assert eig(dual_nakano_form(R))[-1] <= 1e-12 * R.max_norm


@given(seeds, dims)
def test_semi_nakano_negative_class(seed, n):
    R = random_kahler_tensor(seed, n, "semi-nakano-negative")
    assert eig(nakano_form(R))[-1] <= 1e-12 * R.max_norm


def test_random_rejects_unknown_class():
    with pytest.raises(TensorError):
        random_kahler_tensor(0, 2, "griffiths-positive")


# --------------------------------------------------------------- subbundle

def test_subbundle_with_zero_first_derivative_is_restriction():
    jet = random_adapted_jet(3, 2, 3)
    jet = HermitianMetricJet(jet.h, np.zeros_like(jet.dh), jet.ddh)
    R_E = curvature_from_jet(jet)
    R_S, corr = subbundle_curvature(R_E, jet, 2)
    np.testing.assert_array_equal(R_S.entries, R_E.entries[:, :, :2, :2])
    assert np.all(corr.entries == 0)


def test_subbundle_single_dh_entry_correction_has_one_positive_eigenvalue():
    dh = np.zeros((1, 2, 2), dtype=complex)
    dh[0, 0, 1] = 0.7 - 0.2j
    jet = HermitianMetricJet(np.eye(2), dh, np.zeros((1, 1, 2, 2)))
    R_S, corr = subbundle_curvature(curvature_from_jet(jet), jet, 1)
    lam = eig(nakano_form(corr))
    # the correction is |dh_{0,0,1}|^2 = 0.53 on the single (i, alpha) slot
    np.testing.assert_allclose(lam, [0.53], atol=1e-15)
    assert R_S.r == 1


def test_subbundle_rejects_unadapted_frame_and_bad_rank():
    jet = HermitianMetricJet(2 * np.eye(2), np.zeros((1, 2, 2)), np.zeros((1, 1, 2, 2)))
    with pytest.raises(TensorError):
        subbundle_curvature(curvature_from_jet(jet), jet, 1)
    jet = random_adapted_jet(0, 2, 2)
    with pytest.raises(TensorError):
        subbundle_curvature(curvature_from_jet(jet), jet, 2)


@given(seeds, st.integers(1, 3), st.integers(2, 4), st.data())
def test_subbundle_correction_is_nakano_semipositive(seed, n, r, data):
    s = data.draw(st.integers(1, r - 1))
    jet = random_adapted_jet(seed, n, r)
    R_E = curvature_from_jet(jet)
    R_S, corr = subbundle_curvature(R_E, jet, s)
    np.testing.assert_allclose(R_E.entries[:, :, :s, :s] - R_S.entries, corr.entries, atol=1e-12)
    assert eig(nakano_form(corr))[0] >= -1e-12 * max(1.0, corr.max_norm)


@given(seeds, st.integers(1, 3), st.integers(2, 4), st.data())
def test_subbundle_of_semi_nakano_negative_is_semi_nakano_negative(seed, n, r, data):
    s = data.draw(st.integers(1, r - 1))
    jet = random_adapted_jet(seed, n, r, "semi-nakano-negative")
    R_E = curvature_from_jet(jet)
    assert eig(nakano_form(R_E))[-1] <= 1e-10 * R_E.max_norm
    R_S, _ = subbundle_curvature(R_E, jet, s)
    assert eig(nakano_form(R_S))[-1] <= 1e-10 * R_E.max_norm


# -------------------------------------------------------------------- dual

@given(seeds, dims)
def test_dual_is_involution(seed, n):
    R = random_kahler_tensor(seed, n)
    np.testing.assert_array_equal(dual_tensor(dual_tensor(R)).entries, R.entries)


def test_dual_of_ball_rank_one():
    assert dual_tensor(model_complex_ball(1))[0, 0, 0, 0] == 2


def test_dual_swaps_dual_nakano_and_nakano_signs():
    # dual-Nakano-positive E  <=>  Nakano-negative E*, and with signs reversed
    B = model_complex_ball(2)
    assert eig(dual_nakano_form(B))[-1] < 0
    np.testing.assert_allclose(eig(nakano_form(dual_tensor(B))), [1, 1, 1, 3], atol=1e-14)
    F = model_fubini_study(2)
    assert eig(dual_nakano_form(F))[0] > 0
    assert eig(nakano_form(dual_tensor(F)))[-1] < 0


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_dual_swaps_form_spectra(seed, n, r):
    R = curvature_from_jet(random_adapted_jet(seed, n, r))
    np.testing.assert_allclose(eig(nakano_form(dual_tensor(R))),
                               np.sort(-eig(dual_nakano_form(R))), atol=1e-10 * max(1, R.max_norm))


# ---------------------------------------------------------------- validate

def test_validate_reports_one_injected_defect():
    e = model_fubini_study(3).entries.copy()
    e[0, 1, 2, 0] += 1e-6
    bad = validate(CurvatureTensor(e, kahler=False))
    assert len(bad) == 1 and "hermitian" in bad[0]


def test_validate_reports_kahler_defect():
    e = model_fubini_study(2).entries.copy()
    e[0, 0, 1, 1] += 1e-6
    e[0, 0, 1, 1] = e[0, 0, 1, 1].real
    bad = validate(CurvatureTensor(e, kahler=True))
    assert bad and all("swap" in b for b in bad)


def test_validate_flags_non_finite():
    e = np.zeros((1, 1, 1, 1), dtype=complex)
    e[0, 0, 0, 0] = np.nan
    assert validate(CurvatureTensor(e)) == ["non-finite entries"]


@given(seeds, dims)
def test_kahler_symmetrize_is_projection(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
    e = kahler_symmetrize(x)
    np.testing.assert_allclose(kahler_symmetrize(e), e, atol=1e-13)
    assert np.max(np.abs(e - hermitian_conjugate(e))) == 0


# ------------------------------------------------------------------ frames

@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_unitary_frame_change_preserves_spectra(seed, n, r):
    rng = np.random.default_rng(seed)
    R = curvature_from_jet(random_adapted_jet(seed, n, r))
    U, V = oracles.random_unitary(rng, n), oracles.random_unitary(rng, r)
    R2 = change_frame(R, U, V)
    tol = 1e-10 * max(1.0, R.max_norm)
    np.testing.assert_allclose(eig(nakano_form(R2)), eig(nakano_form(R)), atol=tol)
    np.testing.assert_allclose(eig(dual_nakano_form(R2)), eig(dual_nakano_form(R)), atol=tol)


@given(seeds, st.integers(1, 4))
def test_orthonormalizing_frame(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    G = A @ A.conj().T + 0.1 * np.eye(n)
    P = orthonormalizing_frame(G)
    np.testing.assert_allclose(P.T @ G @ P.conj(), np.eye(n), atol=1e-10 * np.abs(G).max())


def test_orthonormalizing_frame_rejects_singular_gram():
    with pytest.raises(TensorError):
        orthonormalizing_frame(np.diag([1.0, 0.0]))


def test_zero_tensor_shapes():
    Z = zero_tensor(2, 3)
    assert (Z.n, Z.r, Z.kahler) == (2, 3, False)
    assert zero_tensor(3).kahler
