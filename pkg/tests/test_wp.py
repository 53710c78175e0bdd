import numpy as np
import pytest

from curvlab.positivity import forms
from curvlab.positivity.classify import classify_eigen, classify_sampled
from curvlab.tensor_core import dual_tensor
from curvlab.wp import (GreenOperator, LiouvilleError, MeshError, StructureMismatch,
                        build_mesh, curvature_samples, duality_residual, green_apply, green_kernel,
                        harmonicity_residual, normalized, quadratic_differential_basis,
                        solve_liouville, symmetrized_identity_check, tangent_curvature,
                        wolpert_curvature)
from curvlab.wp.mesh import MAX_ANGLE_DEG, MIN_ANGLE_DEG, HyperellipticCurve, to_sphere
from curvlab.wp.pipeline import MESH_TOL_FACTOR

FOUR_PI = 4 * np.pi


# --------------------------------------------------------------------- mesh

def test_mesh_topology_level2(wp_level2):
    m = wp_level2["mesh"]
    assert m.euler_characteristic == -2
    assert MIN_ANGLE_DEG < m.min_angle and m.max_angle < MAX_ANGLE_DEG
    L = m.L
    assert abs(L - L.T).max() == 0
    assert np.max(np.abs(L.sum(axis=1))) < 1e-12


def test_branch_points_are_vertices(wp_level2, x6_curve):
    m = wp_level2["mesh"]
    assert np.array_equal(m.branch[:6], np.arange(6))
    assert np.sum(m.is_branch) == 6
    np.testing.assert_allclose(m.points[:6], to_sphere(x6_curve.roots), atol=1e-12)


def test_refinement_grows_four_fold(x6_curve):
    faces = [len(build_mesh(x6_curve, k).faces) for k in range(4)]
    assert [b / a for a, b in zip(faces, faces[1:])] == [4.0, 4.0, 4.0]
    for k in range(4):
        assert build_mesh(x6_curve, k).euler_characteristic == -2


def test_duplicate_root_rejected_with_pair():
    with pytest.raises(MeshError, match=r"roots \d and \d are not separated"):
        HyperellipticCurve.from_roots([1, 1 + 1e-9, -1, 2j, -2j, 3])


def test_degree_five_rejected():
    with pytest.raises(MeshError, match="c6"):
        HyperellipticCurve((-1, 0, 0, 0, 0, 1, 0))


@pytest.mark.parametrize("level", [-1, 7, 2.5])
def test_bad_refinement_level_rejected(x6_curve, level):
    with pytest.raises(MeshError):
        build_mesh(x6_curve, level)


@pytest.mark.parametrize("roots", [
    [0.3 + 0.1j, -1.2, 2.0j, -0.5 - 1.5j, 1.7, 0.9 - 0.8j],
    [1, -1, 2j, -2j, 0.5 + 0.5j, -3],
])
def test_generic_curves_build_at_every_level(roots):
    curve = HyperellipticCurve.from_roots(roots)
    faces = None
    for k in range(3):
        m = build_mesh(curve, k)
        assert m.euler_characteristic == -2
        assert MIN_ANGLE_DEG < m.min_angle and m.max_angle < MAX_ANGLE_DEG
        if faces is not None:
            assert len(m.faces) == 4 * faces
        faces = len(m.faces)
        s = solve_liouville(m)
        assert s.residual < 1e-8
        assert s.total_area == pytest.approx(FOUR_PI, rel=5e-3)


def test_edge_lengths_are_chart_independent(x6_curve):
    # the same pair of points measured in x and in the root coordinate w
    from curvlab.wp.mesh import CHART_BRANCH, CHART_X, _geodesic_lengths
    k = int(np.argmin(np.abs(x6_curve.roots - 1)))
    e = x6_curve.roots[k]
    x0 = e + 0.45 * np.exp(1j * np.linspace(0, 6, 20))
    x1 = x0 + 0.05 * np.exp(1j * np.linspace(1, 4, 20))
    w0, w1 = np.sqrt(x0 - e + 0j), np.sqrt(x1 - e + 0j)
    w1 = np.where(np.abs(w1 - w0) <= np.abs(w1 + w0), w1, -w1)
    a = _geodesic_lengths(x6_curve, x0, x1, CHART_X)
    b = _geodesic_lengths(x6_curve, w0, w1, CHART_BRANCH, k)
    np.testing.assert_allclose(a, b, rtol=1e-7)


# ---------------------------------------------------------------- Liouville

def test_liouville_level2(wp_level2, x6_curve):
    s = wp_level2["structure"]
    assert s.residual < 1e-8
    assert abs(s.total_area / FOUR_PI - 1) < 5e-3
    again = solve_liouville(build_mesh(x6_curve, 2))
    np.testing.assert_array_equal(again.u, s.u)


def test_area_error_at_every_level(x6_curve):
    # the lumped angle defects sum to 4*pi exactly, so the discrete area
    # matches Gauss-Bonnet to rounding at every level
    for k in range(4):
        s = solve_liouville(build_mesh(x6_curve, k))
        assert abs(s.total_area / FOUR_PI - 1) < 1e-9


def test_newton_failure_reports_history(wp_level2):
    with pytest.raises(LiouvilleError) as info:
        solve_liouville(wp_level2["mesh"], max_iter=1)
    assert len(info.value.history) == 2
    assert "residual history" in str(info.value)


def test_reevaluated_curvature_median_level3(wp_run3):
    K = curvature_samples(wp_run3.structure)
    assert len(K) > 100
    assert abs(np.median(K) + 1) < 0.02


def test_reevaluated_curvature_pointwise_level3(wp_run3):
    # every sampled regular vertex away from the roots should read -1 +- 2%
    K = curvature_samples(wp_run3.structure)
    assert np.max(np.abs(K + 1)) <= 0.02, (
        f"{np.mean(np.abs(K + 1) <= 0.02):.3f} of {len(K)} samples within 2%, "
        f"worst {np.max(np.abs(K + 1)):.3f}")


# -------------------------------------------------------------------- Green

def test_green_constants_and_identity(wp_level2):
    s, g = wp_level2["structure"], wp_level2["green"]
    V = s.mesh.n_vertices
    np.testing.assert_allclose(green_apply(s, np.ones(V)), 1.0, atol=1e-12)
    f = np.random.default_rng(0).normal(size=(V, 3)) + 1j * np.random.default_rng(1).normal(size=(V, 3))
    u = g.apply(f)
    assert np.max(np.abs(g.operator(u) - f)) / np.max(np.abs(f)) < 1e-9


def test_green_kernel_symmetric_positive(wp_level2):
    s, g = wp_level2["structure"], wp_level2["green"]
    G, asym = g.kernel()
    assert asym < 1e-10
    assert np.max(np.abs(G - G.T)) < 1e-10
    assert G.min() > 0
    # (Delta0 + 1) G = diag(dA)^{-1}: applying K column-wise returns the identity
    V = s.mesh.n_vertices
    assert np.max(np.abs(g.K @ G[:, :32] - np.eye(V)[:, :32])) < 1e-9
    np.testing.assert_allclose(green_kernel(s), G, atol=1e-13)


# -------------------------------------------------------------------- basis

def test_basis_level2(wp_level2):
    b = wp_level2["basis"]
    assert b.size == 3
    assert b.pointwise_norm_residual() < 1e-12
    for G in (b.gram_wp, b.gram_hodge):
        assert np.max(np.abs(G - G.conj().T)) < 1e-12 * np.max(np.abs(G))
        assert np.linalg.eigvalsh(G)[0] > 0
    assert b.hodge_wp_residual() < 1e-10


def test_harmonicity_decreases_under_refinement(x6_curve, wp_level2, wp_run3):
    r1 = harmonicity_residual(quadratic_differential_basis(solve_liouville(build_mesh(x6_curve, 1))))
    r2 = harmonicity_residual(wp_level2["basis"])
    r3 = harmonicity_residual(wp_run3.basis)
    assert np.all(r2 < r1) and np.all(r3 < r2)


def test_basis_change_is_a_congruence(wp_level2):
    s, b = wp_level2["structure"], wp_level2["basis"]
    T = np.array([[1, 2j, 0], [0.5, 1, -1], [0, 1j, 3]])
    b2 = quadratic_differential_basis(s, transform=T)
    np.testing.assert_allclose(b2.gram_wp, T.conj().T @ b.gram_wp @ T, atol=1e-12 * np.abs(b2.gram_wp).max())
    # orthonormalized tensors differ by a unitary, so their form spectra agree
    c1, t1 = normalized(wp_level2["curv"], b)
    c2, t2 = normalized(wolpert_curvature(b2, green=wp_level2["green"]), b2)
    for x, y in ((c1, c2), (t1, t2)):
        for form in (forms.nakano_form, forms.dual_nakano_form):
            np.testing.assert_allclose(np.linalg.eigvalsh(form(x)), np.linalg.eigvalsh(form(y)),
                                       atol=1e-9 * x.max_norm)


def test_singular_transform_is_harmless_but_flagged(wp_level2):
    b = quadratic_differential_basis(wp_level2["structure"], transform=np.diag([1, 1, 0]))
    assert abs(np.linalg.eigvalsh(b.gram_wp)[0]) < 1e-12 * np.abs(b.gram_wp).max()


# ---------------------------------------------------------------- curvature

def test_cotangent_tensor_level2(wp_level2):
    curv, basis = wp_level2["curv"], wp_level2["basis"]
    assert curv.hermitian_residual < 1e-9
    assert curv.alternative_hermitian_residual < 1e-9
    assert np.isfinite(curv.exchange_residual)
    assert set(curv.to_dict()) == {"hermitian_residual", "exchange_residual",
                                   "alternative_placement_hermitian_residual"}
    diag = np.einsum("iiii->i", curv.cotangent.entries)
    assert np.all(diag.real > 0) and np.max(np.abs(diag.imag)) < 1e-12 * np.max(diag.real)
    cot, _ = normalized(curv, basis)
    tol = MESH_TOL_FACTOR * cot.max_norm
    nak = classify_eigen("nakano", cot, tol)
    assert nak.sign == "positive" and nak.certified
    assert np.linalg.eigvalsh(forms.dual_nakano_form(cot))[0] >= -tol


def test_tangent_tensor_level2(wp_level2):
    curv, basis = wp_level2["curv"], wp_level2["basis"]
    T = curv.tangent.entries
    assert np.max(np.abs(T - np.conj(T.transpose(1, 0, 3, 2)))) < 1e-9 * np.max(np.abs(T))
    _, tan = normalized(curv, basis)
    u = np.random.default_rng(0).normal(size=(10_000, 3)) + 1j * np.random.default_rng(1).normal(size=(10_000, 3))
    assert max(forms.holo_sectional_value(tan, x) for x in u) < 0
    v = classify_sampled("bisectional", tan, 2000, 6, MESH_TOL_FACTOR * tan.max_norm, seed=0)
    assert v.max_value < 0
    assert duality_residual(curv, basis) < 1e-4


def test_tangent_equals_dual_of_cotangent_in_frame(wp_level2):
    cot, tan = normalized(wp_level2["curv"], wp_level2["basis"])
    d = dual_tensor(cot).entries
    assert np.max(np.abs(d - tan.entries)) < 1e-4 * np.max(np.abs(tan.entries))


def test_structure_mismatch_errors(wp_level2):
    other = solve_liouville(wp_level2["mesh"])
    basis = wp_level2["basis"]
    with pytest.raises(StructureMismatch):
        wolpert_curvature(basis, green=GreenOperator(other))
    with pytest.raises(StructureMismatch):
        wolpert_curvature(basis, structure=other)
    with pytest.raises(StructureMismatch):
        tangent_curvature(basis, structure=other)
    with pytest.raises(StructureMismatch):
        symmetrized_identity_check(basis, other, np.eye(3))


def test_symmetrized_identity_level2(wp_level2):
    b, s, g, curv = (wp_level2[k] for k in ("basis", "structure", "green", "curv"))
    G = g.kernel()[0]
    assert symmetrized_identity_check(b, s, np.zeros((3, 3)), kernel=G, curvature=curv) == (0.0, 0.0, 0.0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        U = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        lhs, rhs, res = symmetrized_identity_check(b, s, U, kernel=G, curvature=curv)
        assert res < 1e-6 and rhs >= 0 and lhs >= 0


def test_level3_run_manifest(wp_run3):
    m = wp_run3.manifest
    assert m["mesh"]["euler_characteristic"] == -2
    assert m["tensors"]["hermitian_residual"] < 1e-9
    assert m["green"]["identity_residual"] < 1e-9
    assert m["green"]["kernel"]["min_entry"] > 0
    assert m["symmetrization"]["min_rhs"] >= 0
    assert m["tensors"]["cotangent_diagonal_min"] > 0
    assert wp_run3.as_expected, wp_run3.mismatches
